#ifndef GSPSIM_AQM_H
#define GSPSIM_AQM_H

#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <vector>

#include "gspsim/packet.h"
#include "gspsim/sim_time.h"

namespace gspsim {

// ---------------------------------------------------------------------------
// Buffer sizing
// ---------------------------------------------------------------------------

// Queuing delay a flow with multiplicative decrease ratio `beta` must be able
// to accumulate on top of the propagation RTT so that the post-decrease
// window still fills the link: rtt0 * (1 - beta) / beta.
double delay_budget(double rtt0, double beta);

// Minimum buffer that guarantees full throughput for a single flow,
// capacity * rtt0 * (1 - beta) / beta, rounded up to a whole byte. This is
// the bandwidth-delay product generalized to an arbitrary decrease ratio.
int64_t min_buffer(double capacity_bps, double rtt0, double beta);

struct BufferSizing {
    double capacity_bps = 0;
    double rtt0 = 0;
    double beta = 0;
    double delay_budget_s = 0;
    int64_t min_buffer_bytes = 0;
};

BufferSizing make_buffer_sizing(double capacity_bps, double rtt0, double beta);

// ---------------------------------------------------------------------------
// Queue view and verdicts
// ---------------------------------------------------------------------------

// Read-only view of the bottleneck queue, taken at packet arrival. Backlog
// counts waiting packets only; the packet currently being serialized has
// already left the buffer.
struct QueueSnapshot {
    int64_t backlog_bytes = 0;
    int64_t backlog_packets = 0;
    std::optional<SimTime> head_arrival_time;  // absent when the queue is empty
    int64_t buffer_limit = 0;
};

enum class Verdict { Accept, DropThreshold, DropOverflow };

// Plain tail-drop: overflow is the only drop cause.
Verdict taildrop_decide(const QueueSnapshot& q, int64_t packet_size);

// Sojourn age of the oldest waiting packet; zero for an empty queue.
SimTime estimate_queue_delay(const QueueSnapshot& q, SimTime now);

// ---------------------------------------------------------------------------
// GSP
// ---------------------------------------------------------------------------

enum class ThresholdMode { ByteLength, Delay };

// The drop condition `queue > threshold`, generalized so both sides can be
// expressed in memory-size units or in time units.
struct ThresholdSpec {
    ThresholdMode mode = ThresholdMode::ByteLength;
    int64_t byte_value = 0;   // used iff ByteLength
    SimTime delay_value;      // used iff Delay

    static ThresholdSpec bytes(int64_t v) { return {ThresholdMode::ByteLength, v, SimTime()}; }
    static ThresholdSpec delay(SimTime v) { return {ThresholdMode::Delay, 0, v}; }
    bool operator==(const ThresholdSpec&) const = default;
};

bool gsp_threshold_exceeded(const QueueSnapshot& q, const ThresholdSpec& spec, SimTime now);

struct GspConfig {
    ThresholdSpec threshold;
    SimTime preset_interval = SimTime::from_ms(200);  // initial and maximum interval
    SimTime tau = SimTime::from_ms(1000);             // adaptation time constant
    double alpha = 2.0;                               // emphasis on time above threshold
    SimTime max_time = SimTime::from_seconds(200);    // cumul_time clamp
    int64_t buffer_limit = 0;
    bool adaptive = false;

    void validate() const;  // throws std::invalid_argument on constraint violations
};

// After a buffer overflow the queue spends a long stretch below threshold
// while it drains; counting that stretch would grow the interval exactly when
// it must shrink. The accumulation of below-threshold time is therefore
// suspended from the overflow until the queue has emptied and crossed the
// threshold again.
enum class HysteresisPhase { Normal, OverflowSeen, DrainedAwaitingAbove };

struct GspState {
    SimTime expiry;                  // end of the current no-drop interval (absolute)
    SimTime interval;                // current spacing between threshold drops
    SimTime cumul_time;              // integrator state, clamped to [0, max_time]
    SimTime last_update;             // time of the previous clock update (absolute)
    bool was_above_at_last_update = false;
    HysteresisPhase hysteresis = HysteresisPhase::Normal;

    static GspState initial(const GspConfig& cfg) {
        GspState s;
        s.interval = cfg.preset_interval;
        return s;
    }
};

// Interval adaptation, run at packet arrival before the drop decision when
// the adaptive variant is enabled:
//
//   cumul_time += alpha * time_above_threshold - time_below_threshold
//   cumul_time  = min(max_time, max(0, cumul_time))
//   interval    = preset_interval / (1 + cumul_time / tau)
//
// The inter-arrival gap is attributed above/below according to the threshold
// state observed at the end of the previous update. Below-threshold time is
// suspended while the hysteresis machine is away from Normal.
void gsp_update_clock(GspState& state, const GspConfig& cfg, const QueueSnapshot& q, SimTime now);

// The arrival-path drop decision:
//
//   IF (queue > threshold) AND (now > expiry) { drop; expiry = now + interval }
//   ELSE enqueue
//
// with the buffer overflow backstop checked first. All drops happen here, at
// arrival; packets already stored are never touched.
Verdict gsp_decide(GspState& state, const GspConfig& cfg, const QueueSnapshot& q,
                   int64_t packet_size, SimTime now);

// ---------------------------------------------------------------------------
// CoDel baseline (simplified; drops at dequeue, unlike every other policy)
// ---------------------------------------------------------------------------

struct CodelConfig {
    SimTime target = SimTime::from_ms(5);
    SimTime interval = SimTime::from_ms(100);
    int32_t mtu = 1500;

    bool operator==(const CodelConfig&) const = default;
};

struct CodelState {
    std::optional<SimTime> first_above_time;
    SimTime drop_next;
    uint32_t count = 0;
    uint32_t lastcount = 0;
    bool dropping = false;
};

// Pops the next packet to transmit from `queue`, appending any packets the
// control law discards to `dropped`. `queue_bytes` is kept in sync with the
// queue contents. Returns nullopt only when the queue is empty on entry; the
// last remaining packet is never dropped.
std::optional<Packet> codel_dequeue(CodelState& state, const CodelConfig& cfg,
                                    std::deque<Packet>& queue, int64_t& queue_bytes,
                                    SimTime now, std::vector<Packet>& dropped);

// ---------------------------------------------------------------------------
// PIE baseline (simplified)
// ---------------------------------------------------------------------------

struct PieConfig {
    SimTime target = SimTime::from_ms(15);
    SimTime update_period = SimTime::from_ms(15);
    double alpha = 0.125;  // 1/s of delay error
    double beta = 1.25;    // per unit of delay trend
    int32_t mtu = 1500;

    bool operator==(const PieConfig&) const = default;
};

struct PieState {
    double drop_prob = 0.0;
    double last_delay_s = 0.0;
    std::mt19937_64 rng;

    explicit PieState(uint64_t seed = 1) : rng(seed) {}
};

// Periodic probability update from the delay estimate and its trend.
void pie_update_probability(PieState& state, const PieConfig& cfg, double est_delay_s);

// Arrival-path decision: overflow backstop, then a random early drop with the
// current probability (with the usual small-queue protections).
Verdict pie_decide(PieState& state, const PieConfig& cfg, const QueueSnapshot& q,
                   int64_t packet_size, double est_delay_s);

}  // namespace gspsim

#endif
