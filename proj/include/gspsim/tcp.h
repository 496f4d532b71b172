#ifndef GSPSIM_TCP_H
#define GSPSIM_TCP_H

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "gspsim/packet.h"
#include "gspsim/sim_time.h"

namespace gspsim {

enum class TcpKind { Reno, Cubic };

struct TcpFlavor {
    TcpKind kind = TcpKind::Cubic;
    double beta = 0.7;         // post/pre cwnd ratio on a congestion signal
    double cubic_scale = 0.4;  // cubic C constant, segments per second cubed

    static TcpFlavor reno() { return {TcpKind::Reno, 0.5, 0.0}; }
    static TcpFlavor cubic() { return {TcpKind::Cubic, 0.7, 0.4}; }
    bool operator==(const TcpFlavor&) const = default;
};

struct TcpParams {
    int32_t mss = 1500;
    int32_t initial_window_segments = 10;
    SimTime delack_timeout = SimTime::from_ms(40);
    double rto_rtt0_multiple = 4.0;  // fixed RTO, deadlock backstop only
};

enum class TcpPhase { SlowStart, CongestionAvoidance, Recovery };

// The cubic growth function in bytes: W(t) = C*(t-K)^3 + w_max in segment
// units, K = cbrt(w_max*(1-beta)/C), evaluated t seconds after the last
// decrease. W(0) = beta*w_max by construction of K.
double cubic_window(double t_seconds, double w_max_bytes, double beta,
                    double cubic_scale, int32_t mss);

struct TcpSender {
    uint32_t flow_id = 0;
    TcpFlavor flavor;
    TcpParams params;
    SimTime rtt0;

    double cwnd = 0;      // bytes; fractional growth accumulates exactly
    double ssthresh = std::numeric_limits<double>::infinity();
    int64_t flight = 0;   // bytes emitted, not yet acked and not declared lost
    TcpPhase phase = TcpPhase::SlowStart;
    int64_t next_seq = 0;
    int64_t highest_acked = 0;
    int dup_ack_count = 0;

    // Multiplicative-decrease bookkeeping.
    double w_max = 0;                 // cwnd right before the last decrease
    SimTime last_decrease_time;
    bool ever_decreased = false;

    // Loss-repair bookkeeping, active while the cumulative ack is below
    // recovery_end_seq. Holes reported by the receiver queue up in
    // repair_pending and are retransmitted at most once each, paced by
    // returning acks (one hole per duplicate, one per newly acked segment).
    int64_t recovery_end_seq = 0;
    bool repair_active = false;
    std::set<int64_t> repair_pending;
    std::set<int64_t> repair_done;

    // Smoothed RTT from ack echo timestamps; rtt0 until the first sample.
    SimTime srtt;
    bool srtt_valid = false;

    static TcpSender make(uint32_t flow_id, TcpFlavor flavor, SimTime rtt0, TcpParams params = {});

    SimTime rtt_estimate() const { return srtt_valid ? srtt : rtt0; }
    int64_t send_permission() const;
};

// Side effects of processing one ack that the simulator must carry out.
struct SenderActions {
    int64_t send_permission = 0;          // bytes of new data that may be emitted
    std::vector<int64_t> retransmit_seqs; // holes to resend, in order
};

// Ack-clocked sender state machine. Covers delayed-ack-aware growth
// (per-ack counting, no ABC), fast retransmit on the third duplicate ack,
// ack-paced repair of the remaining holes, and recovery exit once the
// pre-loss highest sequence is acknowledged.
// Throws std::runtime_error if the ack covers unsent data.
SenderActions sender_on_ack(TcpSender& s, const AckInfo& ack, SimTime now);

// Multiplicative decrease. Ignored (returns false) when the last decrease
// happened less than one RTT estimate ago.
bool sender_on_loss(TcpSender& s, SimTime now);

// Retransmission timeout: declare everything in flight lost, decrease once,
// restart in slow start. Returns the sequence to retransmit.
int64_t sender_on_rto(TcpSender& s, SimTime now);

// Emits whole-MSS packets back to back while cwnd - flight allows.
std::vector<Packet> sender_emit(TcpSender& s, SimTime now, uint64_t& next_packet_id);

// One retransmitted segment; counts toward flight like any emission.
Packet sender_emit_retransmit(TcpSender& s, int64_t seq, SimTime now, uint64_t& next_packet_id);

// ---------------------------------------------------------------------------
// Receiver
// ---------------------------------------------------------------------------

struct TcpReceiver {
    uint32_t flow_id = 0;
    int32_t mss = 1500;                  // grid for reporting missing segments
    int64_t next_expected_seq = 0;
    int delack_pending = 0;              // 0 or 1
    std::optional<SimTime> delack_deadline;
    SimTime pending_echo_time;           // send time of the oldest unacked segment
    std::map<int64_t, int64_t> ooo;      // out-of-order byte ranges, start -> end
    int64_t acked_edge = 0;              // highest cumulative ack emitted so far
};

struct ReceiverResult {
    std::optional<AckInfo> ack;          // emitted immediately, if any
    std::optional<SimTime> schedule_delack_at;
};

// In-order data acks every second segment immediately and arms the delayed
// ack timer for odd ones; out-of-order data produces an immediate duplicate
// ack. Out-of-order payload is buffered so a retransmission acknowledges
// everything contiguous in one jump.
ReceiverResult receiver_on_data(TcpReceiver& r, int64_t seq, int32_t len,
                                SimTime send_time, SimTime now, SimTime delack_timeout);

// Fires the delayed-ack timer; returns the pending cumulative ack.
std::optional<AckInfo> receiver_delack_fire(TcpReceiver& r, SimTime now);

}  // namespace gspsim

#endif
