#include "gspsim/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gspsim {

double UtilizationSeries::mean() const {
    if (values.empty()) return 0.0;
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

std::optional<double> quantile(std::vector<double> samples, double q) {
    if (q < 0.0 || q > 1.0) throw std::invalid_argument("quantile: q must be in [0, 1]");
    if (samples.empty()) return std::nullopt;
    std::sort(samples.begin(), samples.end());
    const auto n = static_cast<double>(samples.size());
    auto rank = static_cast<size_t>(std::ceil(q * n));
    if (rank < 1) rank = 1;
    return samples[rank - 1];
}

std::vector<std::pair<double, double>> cdf(std::vector<double> samples) {
    if (samples.empty()) throw std::invalid_argument("cdf: empty sample set");
    std::sort(samples.begin(), samples.end());
    std::vector<std::pair<double, double>> steps;
    const size_t n = samples.size();
    for (size_t i = 0; i < n; ++i) {
        // Last index of a run of duplicates carries the step.
        if (i + 1 == n || samples[i + 1] != samples[i]) {
            const double p = (i + 1 == n) ? 1.0 : static_cast<double>(i + 1) / static_cast<double>(n);
            steps.emplace_back(samples[i], p);
        }
    }
    return steps;
}

UtilizationSeries utilization(const std::vector<std::pair<SimTime, int64_t>>& departures,
                              const CapacitySchedule& schedule, SimTime window, SimTime t_end) {
    if (window <= SimTime()) throw std::invalid_argument("utilization: window must be positive");
    UtilizationSeries series;
    series.window_s = window.seconds();

    size_t i = 0;
    for (SimTime start; start + window <= t_end; start += window) {
        const SimTime end = start + window;
        int64_t delivered = 0;
        while (i < departures.size() && departures[i].first < end) {
            delivered += departures[i].second;
            ++i;
        }
        const double possible = capacity_bytes_over(schedule, start, end);
        series.values.push_back(possible > 0 ? static_cast<double>(delivered) / possible : 0.0);
    }
    return series;
}

double empty_fraction(const std::vector<QlenSample>& trace, SimTime t0, SimTime t1) {
    if (t1 <= t0) return 0.0;

    // State before the first in-range change point comes from the last
    // sample at or before t0; an untouched queue starts empty.
    bool empty = true;
    SimTime cursor = t0;
    SimTime empty_time;
    for (const auto& s : trace) {
        if (s.time <= t0) {
            empty = (s.backlog_bytes == 0);
            continue;
        }
        if (s.time >= t1) break;
        if (empty) empty_time += s.time - cursor;
        cursor = s.time;
        empty = (s.backlog_bytes == 0);
    }
    if (empty) empty_time += t1 - cursor;
    return empty_time.seconds() / (t1 - t0).seconds();
}

std::map<DropReason, int64_t> Metrics::drop_counts() const {
    std::map<DropReason, int64_t> counts;
    for (const auto& d : drops) ++counts[d.reason];
    return counts;
}

SummaryStats summarize(const Metrics& m, const CapacitySchedule& schedule,
                       SimTime util_window, SimTime duration) {
    SummaryStats s;
    std::vector<double> delays;
    delays.reserve(m.delays.size());
    for (const auto& d : m.delays) delays.push_back(d.delay_s);

    if (!delays.empty()) {
        s.mean_delay_s = std::accumulate(delays.begin(), delays.end(), 0.0) / static_cast<double>(delays.size());
        s.median_delay_s = quantile(delays, 0.5);
        s.p5_delay_s = quantile(delays, 0.05);
        s.p95_delay_s = quantile(delays, 0.95);
    }

    s.mean_utilization = utilization(m.departures, schedule, util_window, duration).mean();

    const auto counts = m.drop_counts();
    auto count_of = [&counts](DropReason r) {
        auto it = counts.find(r);
        return it == counts.end() ? int64_t{0} : it->second;
    };
    s.drops_threshold = count_of(DropReason::Threshold);
    s.drops_overflow = count_of(DropReason::Overflow);
    s.drops_codel = count_of(DropReason::CodelMark);
    s.drops_pie = count_of(DropReason::PieMark);

    s.empty_fraction = empty_fraction(m.qlen_transitions, SimTime(), duration);
    return s;
}

}  // namespace gspsim
