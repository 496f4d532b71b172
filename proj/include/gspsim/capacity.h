#ifndef GSPSIM_CAPACITY_H
#define GSPSIM_CAPACITY_H

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "gspsim/sim_time.h"

namespace gspsim {

// Piecewise-constant link capacity. The first step must start at t=0;
// step times strictly increase and every rate is positive.
struct RateStep {
    SimTime at;
    int64_t rate_bps = 0;  // bytes per second

    bool operator==(const RateStep&) const = default;
};

using CapacitySchedule = std::vector<RateStep>;

inline void validate_schedule(const CapacitySchedule& schedule) {
    if (schedule.empty()) throw std::invalid_argument("capacity schedule is empty");
    if (schedule.front().at != SimTime()) throw std::invalid_argument("capacity schedule must start at t=0");
    for (size_t i = 0; i < schedule.size(); ++i) {
        if (schedule[i].rate_bps <= 0) throw std::invalid_argument("capacity must be positive");
        if (i > 0 && schedule[i].at <= schedule[i - 1].at)
            throw std::invalid_argument("capacity schedule times must be strictly increasing");
    }
}

inline int64_t rate_at(const CapacitySchedule& schedule, SimTime t) {
    int64_t rate = schedule.front().rate_bps;
    for (const auto& step : schedule) {
        if (step.at <= t) rate = step.rate_bps;
        else break;
    }
    return rate;
}

// Bytes the link could serve over [t0, t1) under the schedule.
inline double capacity_bytes_over(const CapacitySchedule& schedule, SimTime t0, SimTime t1) {
    double total = 0.0;
    for (size_t i = 0; i < schedule.size(); ++i) {
        SimTime seg_start = schedule[i].at;
        SimTime seg_end = (i + 1 < schedule.size()) ? schedule[i + 1].at : t1;
        SimTime lo = seg_start < t0 ? t0 : seg_start;
        SimTime hi = seg_end < t1 ? seg_end : t1;
        if (hi > lo) total += (hi - lo).seconds() * static_cast<double>(schedule[i].rate_bps);
    }
    return total;
}

}  // namespace gspsim

#endif
