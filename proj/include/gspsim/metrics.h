#ifndef GSPSIM_METRICS_H
#define GSPSIM_METRICS_H

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "gspsim/capacity.h"
#include "gspsim/sim_time.h"

namespace gspsim {

struct DelaySample {
    SimTime time;
    double delay_s = 0;
    uint32_t flow_id = 0;
};

enum class DropReason { Threshold, Overflow, CodelMark, PieMark };

struct DropRecord {
    SimTime time;
    uint32_t flow_id = 0;
    DropReason reason = DropReason::Overflow;
};

struct QlenSample {
    SimTime time;
    int64_t backlog_bytes = 0;
};

struct GspTraceSample {
    SimTime time;
    double interval_s = 0;
    double cumul_time_s = 0;
};

struct UtilizationSeries {
    double window_s = 0;
    std::vector<double> values;  // one ratio per complete window

    double mean() const;
};

struct SummaryStats {
    std::optional<double> mean_delay_s;
    std::optional<double> median_delay_s;
    std::optional<double> p5_delay_s;
    std::optional<double> p95_delay_s;
    double mean_utilization = 0;
    int64_t drops_threshold = 0;
    int64_t drops_overflow = 0;
    int64_t drops_codel = 0;
    int64_t drops_pie = 0;
    double empty_fraction = 0;
};

// Nearest-rank quantile: the ceil(q*n)-th smallest sample (1-indexed), with
// q=0 mapping to the minimum. Empty input yields no value.
std::optional<double> quantile(std::vector<double> samples, double q);

// Empirical step CDF; duplicate values merge into one step and the final
// cumulative probability is exactly 1.
std::vector<std::pair<double, double>> cdf(std::vector<double> samples);

// Delivered bytes per window divided by what the capacity schedule could
// serve in that window. Only windows fully inside [0, t_end) are reported.
UtilizationSeries utilization(const std::vector<std::pair<SimTime, int64_t>>& departures,
                              const CapacitySchedule& schedule, SimTime window, SimTime t_end);

// Fraction of [t0, t1) during which the backlog was zero, from a
// step trace of (time, backlog) change points. An empty interval yields 0.
double empty_fraction(const std::vector<QlenSample>& trace, SimTime t0, SimTime t1);

// Per-run collection filled by the simulator.
struct Metrics {
    std::vector<DelaySample> delays;
    std::vector<DropRecord> drops;
    std::vector<std::pair<SimTime, int64_t>> departures;  // (service completion, bytes)
    std::vector<QlenSample> qlen_samples;                 // periodic samples
    std::vector<QlenSample> qlen_transitions;             // exact empty<->busy change points
    std::vector<GspTraceSample> gsp_trace;

    std::map<DropReason, int64_t> drop_counts() const;
};

SummaryStats summarize(const Metrics& m, const CapacitySchedule& schedule,
                       SimTime util_window, SimTime duration);

}  // namespace gspsim

#endif
