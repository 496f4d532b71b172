#ifndef GSPSIM_SIM_TIME_H
#define GSPSIM_SIM_TIME_H

#include <cmath>
#include <compare>
#include <cstdint>

namespace gspsim {

// Simulation time as a signed count of nanoseconds. Both instants and
// durations use this type. Integer time keeps event ordering exact across
// runs; doubles appear only at the configuration and metrics boundaries.
class SimTime {
public:
    constexpr SimTime() : ns_(0) {}

    static constexpr SimTime from_ns(int64_t ns) { return SimTime(ns); }
    static constexpr SimTime from_us(int64_t us) { return SimTime(us * 1000); }
    static constexpr SimTime from_ms(int64_t ms) { return SimTime(ms * 1000000); }
    static SimTime from_seconds(double s) { return SimTime(static_cast<int64_t>(std::llround(s * 1e9))); }

    constexpr int64_t ns() const { return ns_; }
    constexpr double seconds() const { return static_cast<double>(ns_) * 1e-9; }

    // Duration scaled by a dimensionless factor, rounded to the nanosecond.
    SimTime scaled(double factor) const {
        return SimTime(static_cast<int64_t>(std::llround(static_cast<double>(ns_) * factor)));
    }

    constexpr auto operator<=>(const SimTime&) const = default;

    constexpr SimTime operator+(SimTime other) const { return SimTime(ns_ + other.ns_); }
    constexpr SimTime operator-(SimTime other) const { return SimTime(ns_ - other.ns_); }
    SimTime& operator+=(SimTime other) { ns_ += other.ns_; return *this; }
    SimTime& operator-=(SimTime other) { ns_ -= other.ns_; return *this; }
    constexpr SimTime operator*(int64_t k) const { return SimTime(ns_ * k); }

private:
    explicit constexpr SimTime(int64_t ns) : ns_(ns) {}
    int64_t ns_;
};

// Time to serialize `bytes` at `rate_bps` bytes per second, rounded to the
// nearest nanosecond. Exact for the usual MTU/line-rate combinations.
inline SimTime transmission_time(int64_t bytes, int64_t rate_bps) {
    const auto num = static_cast<__int128>(bytes) * 1000000000 + rate_bps / 2;
    return SimTime::from_ns(static_cast<int64_t>(num / rate_bps));
}

}  // namespace gspsim

#endif
