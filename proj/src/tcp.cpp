#include "gspsim/tcp.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gspsim {

double cubic_window(double t_seconds, double w_max_bytes, double beta,
                    double cubic_scale, int32_t mss) {
    const double w_max_seg = w_max_bytes / mss;
    const double k = std::cbrt(w_max_seg * (1.0 - beta) / cubic_scale);
    const double dt = t_seconds - k;
    return (cubic_scale * dt * dt * dt + w_max_seg) * mss;
}

TcpSender TcpSender::make(uint32_t flow_id, TcpFlavor flavor, SimTime rtt0, TcpParams params) {
    TcpSender s;
    s.flow_id = flow_id;
    s.flavor = flavor;
    s.params = params;
    s.rtt0 = rtt0;
    s.cwnd = static_cast<double>(params.initial_window_segments) * params.mss;
    return s;
}

int64_t TcpSender::send_permission() const {
    const auto window = static_cast<int64_t>(cwnd);
    return std::max<int64_t>(0, window - flight);
}

namespace {

void grow_window(TcpSender& s, const AckInfo& ack, SimTime now) {
    const int32_t mss = s.params.mss;
    if (s.phase == TcpPhase::SlowStart) {
        s.cwnd += static_cast<double>(ack.newly_acked_bytes);
        if (s.cwnd >= s.ssthresh) s.phase = TcpPhase::CongestionAvoidance;
        return;
    }
    if (s.phase != TcpPhase::CongestionAvoidance) return;

    if (s.flavor.kind == TcpKind::Reno) {
        s.cwnd += static_cast<double>(mss) * mss / s.cwnd;
        return;
    }

    // CUBIC, epoch form: the window is a function of the time elapsed since
    // the last decrease, floored by what a Reno sender with delayed acks
    // would have regrown in the same span.
    const double t = (now - s.last_decrease_time).seconds();
    const double target = cubic_window(t, s.w_max, s.flavor.beta, s.flavor.cubic_scale, mss);
    const double reno_floor = s.ssthresh + 0.5 * mss * (t / s.rtt_estimate().seconds());
    s.cwnd = std::max({s.cwnd, target, reno_floor});
}

}  // namespace

namespace {

// Holes the receiver reported that fall inside the current repair window.
void note_missing(TcpSender& s, const AckInfo& ack) {
    for (int64_t h : ack.missing) {
        if (h >= s.highest_acked && h < s.recovery_end_seq && !s.repair_done.count(h))
            s.repair_pending.insert(h);
    }
}

// Retransmit up to `budget` known holes, lowest first. Every returning ack
// means a segment left the network, so this keeps repair ack-clocked instead
// of bursting a window of retransmissions into the queue.
void spend_repair_budget(TcpSender& s, int64_t budget, SenderActions& out) {
    while (budget > 0 && !s.repair_pending.empty()) {
        const int64_t hole = *s.repair_pending.begin();
        s.repair_pending.erase(s.repair_pending.begin());
        if (hole < s.highest_acked) continue;  // already covered
        s.repair_done.insert(hole);
        s.flight -= s.params.mss;  // the hole is declared lost
        if (s.flight < 0) s.flight = 0;
        out.retransmit_seqs.push_back(hole);
        --budget;
    }
}

}  // namespace

SenderActions sender_on_ack(TcpSender& s, const AckInfo& ack, SimTime now) {
    if (ack.flow_id != s.flow_id) throw std::logic_error("ack routed to the wrong flow");
    if (ack.cumulative_ack_seq > s.next_seq)
        throw std::runtime_error("protocol fault: ack covers unsent data");

    SenderActions out;
    if (ack.newly_acked_bytes > 0) {
        const SimTime sample = now - ack.echo_time;
        if (sample > SimTime()) {
            s.srtt = s.srtt_valid ? s.srtt.scaled(0.875) + sample.scaled(0.125) : sample;
            s.srtt_valid = true;
        }

        s.flight -= ack.newly_acked_bytes;
        if (s.flight < 0) s.flight = 0;
        s.highest_acked = ack.cumulative_ack_seq;
        s.dup_ack_count = 0;

        if (s.repair_active) {
            if (ack.cumulative_ack_seq >= s.recovery_end_seq) {
                s.repair_active = false;
                s.repair_pending.clear();
                s.repair_done.clear();
                if (s.phase == TcpPhase::Recovery)
                    s.phase = s.cwnd < s.ssthresh ? TcpPhase::SlowStart : TcpPhase::CongestionAvoidance;
            } else {
                // Partial ack: the cumulative edge is stuck at the next hole.
                if (!s.repair_done.count(ack.cumulative_ack_seq))
                    s.repair_pending.insert(ack.cumulative_ack_seq);
                note_missing(s, ack);
                spend_repair_budget(s, std::max<int64_t>(1, ack.newly_acked_bytes / s.params.mss), out);
            }
        }
        grow_window(s, ack, now);
    } else {
        ++s.dup_ack_count;
        if (s.dup_ack_count == 3 && !s.repair_active) {
            sender_on_loss(s, now);  // may be debounced; repair proceeds regardless
            s.phase = TcpPhase::Recovery;
            s.recovery_end_seq = s.next_seq;
            s.repair_active = true;
            s.repair_pending.clear();
            s.repair_done.clear();
            s.repair_pending.insert(s.highest_acked);
            note_missing(s, ack);
            spend_repair_budget(s, 1, out);
        } else if (s.repair_active) {
            note_missing(s, ack);
            spend_repair_budget(s, 1, out);
        }
    }

    out.send_permission = s.send_permission();
    return out;
}

bool sender_on_loss(TcpSender& s, SimTime now) {
    if (s.ever_decreased && now - s.last_decrease_time < s.rtt_estimate()) return false;
    if (s.flavor.kind == TcpKind::Cubic && s.ever_decreased && s.cwnd < s.w_max) {
        // Fast convergence: losing again before regaining the old plateau
        // means contention went up, so aim the next epoch lower.
        s.w_max = s.cwnd * (1.0 + s.flavor.beta) / 2.0;
    } else {
        s.w_max = s.cwnd;
    }
    s.cwnd = std::max(s.flavor.beta * s.cwnd, 2.0 * s.params.mss);
    s.ssthresh = s.cwnd;
    s.phase = TcpPhase::Recovery;
    s.recovery_end_seq = s.next_seq;
    s.last_decrease_time = now;
    s.ever_decreased = true;
    return true;
}

int64_t sender_on_rto(TcpSender& s, SimTime now) {
    if (!s.ever_decreased || now - s.last_decrease_time >= s.rtt_estimate()) {
        s.w_max = s.cwnd;
        s.ssthresh = std::max(s.flavor.beta * s.cwnd, 2.0 * s.params.mss);
        s.last_decrease_time = now;
        s.ever_decreased = true;
    }
    // Slow-start restart; everything outstanding is treated as lost and
    // recovered through the ack-paced repair path.
    s.cwnd = 2.0 * s.params.mss;
    s.phase = TcpPhase::SlowStart;
    s.flight = 0;
    s.dup_ack_count = 0;
    s.recovery_end_seq = s.next_seq;
    s.repair_active = s.next_seq > s.highest_acked;
    s.repair_pending.clear();
    s.repair_done.clear();
    s.repair_done.insert(s.highest_acked);
    return s.highest_acked;
}

std::vector<Packet> sender_emit(TcpSender& s, SimTime now, uint64_t& next_packet_id) {
    std::vector<Packet> out;
    const int32_t mss = s.params.mss;
    while (s.flight + mss <= static_cast<int64_t>(s.cwnd)) {
        Packet p;
        p.id = next_packet_id++;
        p.flow_id = s.flow_id;
        p.kind = PacketKind::TcpData;
        p.size = mss;
        p.seq = s.next_seq;
        p.send_time = now;
        s.next_seq += mss;
        s.flight += mss;
        out.push_back(p);
    }
    return out;
}

Packet sender_emit_retransmit(TcpSender& s, int64_t seq, SimTime now, uint64_t& next_packet_id) {
    Packet p;
    p.id = next_packet_id++;
    p.flow_id = s.flow_id;
    p.kind = PacketKind::TcpData;
    p.size = s.params.mss;
    p.seq = seq;
    p.send_time = now;
    s.flight += s.params.mss;
    return p;
}

// ---------------------------------------------------------------------------
// Receiver
// ---------------------------------------------------------------------------

namespace {

// Every emitted ack carries the current cumulative edge, the holes below the
// highest buffered byte, and clears any pending delayed ack.
AckInfo make_ack(TcpReceiver& r, SimTime echo) {
    AckInfo ack;
    ack.flow_id = r.flow_id;
    ack.cumulative_ack_seq = r.next_expected_seq;
    ack.newly_acked_bytes = r.next_expected_seq - r.acked_edge;
    ack.is_duplicate = ack.newly_acked_bytes == 0;
    ack.echo_time = echo;

    constexpr size_t max_reported = 64;
    int64_t cursor = r.next_expected_seq;
    for (const auto& [lo, hi] : r.ooo) {
        for (int64_t h = cursor; h < lo && ack.missing.size() < max_reported; h += r.mss)
            ack.missing.push_back(h);
        cursor = hi;
        if (ack.missing.size() >= max_reported) break;
    }

    r.acked_edge = r.next_expected_seq;
    r.delack_pending = 0;
    r.delack_deadline.reset();
    return ack;
}

void buffer_out_of_order(TcpReceiver& r, int64_t lo, int64_t hi) {
    auto it = r.ooo.lower_bound(lo);
    if (it != r.ooo.begin()) {
        auto prev = std::prev(it);
        if (prev->second >= lo) it = prev;
    }
    while (it != r.ooo.end() && it->first <= hi) {
        lo = std::min(lo, it->first);
        hi = std::max(hi, it->second);
        it = r.ooo.erase(it);
    }
    r.ooo[lo] = hi;
}

}  // namespace

ReceiverResult receiver_on_data(TcpReceiver& r, int64_t seq, int32_t len,
                                SimTime send_time, SimTime now, SimTime delack_timeout) {
    ReceiverResult res;
    if (seq == r.next_expected_seq) {
        const bool fills_gap = !r.ooo.empty();
        r.next_expected_seq += len;
        while (!r.ooo.empty() && r.ooo.begin()->first <= r.next_expected_seq) {
            r.next_expected_seq = std::max(r.next_expected_seq, r.ooo.begin()->second);
            r.ooo.erase(r.ooo.begin());
        }
        if (r.delack_pending || fills_gap) {
            const SimTime echo = r.delack_pending ? r.pending_echo_time : send_time;
            res.ack = make_ack(r, echo);
        } else {
            r.delack_pending = 1;
            r.pending_echo_time = send_time;
            r.delack_deadline = now + delack_timeout;
            res.schedule_delack_at = r.delack_deadline;
        }
    } else if (seq > r.next_expected_seq) {
        buffer_out_of_order(r, seq, seq + len);
        res.ack = make_ack(r, send_time);
    } else {
        // Below the edge (spurious retransmission): re-ack the current edge.
        res.ack = make_ack(r, send_time);
    }
    return res;
}

std::optional<AckInfo> receiver_delack_fire(TcpReceiver& r, SimTime now) {
    if (!r.delack_pending || !r.delack_deadline || *r.delack_deadline > now) return std::nullopt;
    return make_ack(r, r.pending_echo_time);
}

}  // namespace gspsim
