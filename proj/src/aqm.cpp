#include "gspsim/aqm.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gspsim {

double delay_budget(double rtt0, double beta) {
    if (rtt0 <= 0) throw std::invalid_argument("delay_budget: rtt0 must be positive");
    if (beta <= 0 || beta > 1) throw std::invalid_argument("delay_budget: beta must be in (0, 1]");
    return rtt0 * (1.0 - beta) / beta;
}

int64_t min_buffer(double capacity_bps, double rtt0, double beta) {
    if (capacity_bps <= 0) throw std::invalid_argument("min_buffer: capacity must be positive");
    return static_cast<int64_t>(std::ceil(capacity_bps * delay_budget(rtt0, beta)));
}

BufferSizing make_buffer_sizing(double capacity_bps, double rtt0, double beta) {
    BufferSizing s;
    s.capacity_bps = capacity_bps;
    s.rtt0 = rtt0;
    s.beta = beta;
    s.delay_budget_s = delay_budget(rtt0, beta);
    s.min_buffer_bytes = min_buffer(capacity_bps, rtt0, beta);
    return s;
}

Verdict taildrop_decide(const QueueSnapshot& q, int64_t packet_size) {
    return q.backlog_bytes + packet_size > q.buffer_limit ? Verdict::DropOverflow : Verdict::Accept;
}

SimTime estimate_queue_delay(const QueueSnapshot& q, SimTime now) {
    if (!q.head_arrival_time) return SimTime();
    return now - *q.head_arrival_time;
}

bool gsp_threshold_exceeded(const QueueSnapshot& q, const ThresholdSpec& spec, SimTime now) {
    if (spec.mode == ThresholdMode::ByteLength) return q.backlog_bytes > spec.byte_value;
    return estimate_queue_delay(q, now) > spec.delay_value;
}

void GspConfig::validate() const {
    if (threshold.mode == ThresholdMode::ByteLength) {
        if (threshold.byte_value <= 0) throw std::invalid_argument("gsp: byte threshold must be positive");
        if (buffer_limit <= threshold.byte_value)
            throw std::invalid_argument("gsp: buffer_limit must exceed the byte threshold");
    } else {
        if (threshold.delay_value <= SimTime())
            throw std::invalid_argument("gsp: delay threshold must be positive");
    }
    if (preset_interval <= SimTime()) throw std::invalid_argument("gsp: preset_interval must be positive");
    if (tau < preset_interval) throw std::invalid_argument("gsp: tau must be at least preset_interval");
    if (alpha < 1.0) throw std::invalid_argument("gsp: alpha must be at least 1");
    if (max_time <= SimTime()) throw std::invalid_argument("gsp: max_time must be positive");
    if (buffer_limit <= 0) throw std::invalid_argument("gsp: buffer_limit must be positive");
}

void gsp_update_clock(GspState& state, const GspConfig& cfg, const QueueSnapshot& q, SimTime now) {
    if (!cfg.adaptive) {
        state.interval = cfg.preset_interval;
        return;
    }
    const SimTime gap = now - state.last_update;
    if (state.was_above_at_last_update) {
        state.cumul_time += gap.scaled(cfg.alpha);
    } else if (state.hysteresis == HysteresisPhase::Normal) {
        state.cumul_time -= gap;
    }
    state.cumul_time = std::clamp(state.cumul_time, SimTime(), cfg.max_time);

    const double slowdown = 1.0 + static_cast<double>(state.cumul_time.ns()) / static_cast<double>(cfg.tau.ns());
    state.interval = SimTime::from_ns(
        static_cast<int64_t>(std::llround(static_cast<double>(cfg.preset_interval.ns()) / slowdown)));

    state.last_update = now;
    state.was_above_at_last_update = gsp_threshold_exceeded(q, cfg.threshold, now);

    if (state.hysteresis == HysteresisPhase::OverflowSeen && q.backlog_bytes == 0) {
        state.hysteresis = HysteresisPhase::DrainedAwaitingAbove;
    } else if (state.hysteresis == HysteresisPhase::DrainedAwaitingAbove && state.was_above_at_last_update) {
        state.hysteresis = HysteresisPhase::Normal;
    }
}

Verdict gsp_decide(GspState& state, const GspConfig& cfg, const QueueSnapshot& q,
                   int64_t packet_size, SimTime now) {
    if (q.backlog_bytes + packet_size > q.buffer_limit) {
        state.hysteresis = HysteresisPhase::OverflowSeen;
        return Verdict::DropOverflow;
    }
    if (gsp_threshold_exceeded(q, cfg.threshold, now) && now > state.expiry) {
        state.expiry = now + state.interval;
        return Verdict::DropThreshold;
    }
    return Verdict::Accept;
}

// --------------------------------------------------------------------------
// CoDel
// --------------------------------------------------------------------------

namespace {

struct DodequeueResult {
    std::optional<Packet> packet;
    bool ok_to_drop = false;
};

// Pop the head and evaluate its sojourn against the target. The state machine
// considers dropping only after the sojourn has stayed above target for a
// full interval, and never when fewer than one MTU of bytes remains queued.
DodequeueResult dodequeue(CodelState& st, const CodelConfig& cfg, std::deque<Packet>& queue,
                          int64_t& queue_bytes, SimTime now) {
    DodequeueResult r;
    if (queue.empty()) {
        st.first_above_time.reset();
        return r;
    }
    r.packet = std::move(queue.front());
    queue.pop_front();
    queue_bytes -= r.packet->size;

    const SimTime sojourn = now - r.packet->enqueue_time;
    if (sojourn < cfg.target || queue_bytes <= cfg.mtu) {
        st.first_above_time.reset();
    } else if (!st.first_above_time) {
        st.first_above_time = now + cfg.interval;
    } else if (now >= *st.first_above_time) {
        r.ok_to_drop = true;
    }
    return r;
}

SimTime control_law(const CodelConfig& cfg, SimTime t, uint32_t count) {
    return t + cfg.interval.scaled(1.0 / std::sqrt(static_cast<double>(count)));
}

}  // namespace

std::optional<Packet> codel_dequeue(CodelState& st, const CodelConfig& cfg,
                                    std::deque<Packet>& queue, int64_t& queue_bytes,
                                    SimTime now, std::vector<Packet>& dropped) {
    DodequeueResult r = dodequeue(st, cfg, queue, queue_bytes, now);
    if (!r.packet) return std::nullopt;

    if (st.dropping) {
        if (!r.ok_to_drop) {
            st.dropping = false;
        }
        while (st.dropping && now >= st.drop_next) {
            dropped.push_back(std::move(*r.packet));
            ++st.count;
            r = dodequeue(st, cfg, queue, queue_bytes, now);
            if (!r.packet) { st.dropping = false; return std::nullopt; }
            if (!r.ok_to_drop) {
                st.dropping = false;
            } else {
                st.drop_next = control_law(cfg, st.drop_next, st.count);
            }
        }
    } else if (r.ok_to_drop) {
        dropped.push_back(std::move(*r.packet));
        r = dodequeue(st, cfg, queue, queue_bytes, now);
        st.dropping = true;
        // Resume near the previous drop rate if we were dropping recently.
        const uint32_t delta = st.count - st.lastcount;
        st.count = (delta > 1 && now - st.drop_next < cfg.interval.scaled(16.0)) ? delta : 1;
        st.drop_next = control_law(cfg, now, st.count);
        st.lastcount = st.count;
        if (!r.packet) { st.dropping = false; return std::nullopt; }
    }
    return r.packet;
}

// --------------------------------------------------------------------------
// PIE
// --------------------------------------------------------------------------

void pie_update_probability(PieState& st, const PieConfig& cfg, double est_delay_s) {
    const double target_s = cfg.target.seconds();
    double dp = cfg.alpha * (est_delay_s - target_s) + cfg.beta * (est_delay_s - st.last_delay_s);

    // Scale gains down while the probability is small, so the controller
    // ramps smoothly from idle.
    if (st.drop_prob < 0.000001) dp /= 2048.0;
    else if (st.drop_prob < 0.00001) dp /= 512.0;
    else if (st.drop_prob < 0.0001) dp /= 128.0;
    else if (st.drop_prob < 0.001) dp /= 32.0;
    else if (st.drop_prob < 0.01) dp /= 8.0;
    else if (st.drop_prob < 0.1) dp /= 2.0;

    st.drop_prob = std::clamp(st.drop_prob + dp, 0.0, 1.0);
    if (est_delay_s == 0.0 && st.last_delay_s == 0.0) st.drop_prob *= 0.98;
    st.last_delay_s = est_delay_s;
}

Verdict pie_decide(PieState& st, const PieConfig& cfg, const QueueSnapshot& q,
                   int64_t packet_size, double est_delay_s) {
    if (q.backlog_bytes + packet_size > q.buffer_limit) return Verdict::DropOverflow;
    if (st.drop_prob <= 0.0) return Verdict::Accept;
    if (est_delay_s < cfg.target.seconds() / 2 && st.drop_prob < 0.2) return Verdict::Accept;
    if (q.backlog_bytes < 2 * cfg.mtu) return Verdict::Accept;

    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    return uniform(st.rng) < st.drop_prob ? Verdict::DropThreshold : Verdict::Accept;
}

}  // namespace gspsim
