#ifndef GSPSIM_NETSIM_H
#define GSPSIM_NETSIM_H

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "gspsim/aqm.h"
#include "gspsim/capacity.h"
#include "gspsim/metrics.h"
#include "gspsim/packet.h"
#include "gspsim/sim_time.h"
#include "gspsim/tcp.h"

namespace gspsim {

// ---------------------------------------------------------------------------
// Event queue
// ---------------------------------------------------------------------------

enum class EventKind { Arrival, ServiceComplete, DelackTimer, RtoTimer, UdpEmit, CapacityChange, StatsTick };

const char* event_kind_name(EventKind k);

// Deterministic discrete-event scheduler. Events execute in (time, kind,
// tie_id, insertion order) order; the clock never moves backward.
class EventQueue {
public:
    void schedule(SimTime t, EventKind kind, uint64_t tie_id, std::function<void()> fn);

    // Executes every event with time <= t_end; afterwards the clock sits at
    // t_end even if no event reached it.
    void run_until(SimTime t_end);

    SimTime now() const { return now_; }
    bool empty() const { return heap_.empty(); }

    struct TraceEntry {
        SimTime time;
        EventKind kind = EventKind::Arrival;
        uint64_t tie_id = 0;
    };
    // The most recent executed events, oldest first (diagnostic tail).
    std::vector<TraceEntry> recent_events() const;

private:
    struct Entry {
        SimTime time;
        int klass;
        uint64_t tie_id;
        uint64_t seq;
        std::shared_ptr<std::function<void()>> fn;
    };
    struct After {
        bool operator()(const Entry& a, const Entry& b) const {
            if (a.time != b.time) return a.time > b.time;
            if (a.klass != b.klass) return a.klass > b.klass;
            if (a.tie_id != b.tie_id) return a.tie_id > b.tie_id;
            return a.seq > b.seq;
        }
    };

    std::priority_queue<Entry, std::vector<Entry>, After> heap_;
    SimTime now_;
    uint64_t next_seq_ = 0;
    std::array<TraceEntry, 32> ring_{};
    size_t ring_count_ = 0;
};

// ---------------------------------------------------------------------------
// Bottleneck link
// ---------------------------------------------------------------------------

enum class AqmKind { TailDrop, GspBasic, GspAdaptive, Codel, Pie };

const char* aqm_kind_name(AqmKind k);

struct AqmSettings {
    AqmKind kind = AqmKind::TailDrop;
    ThresholdSpec threshold;
    SimTime preset_interval = SimTime::from_ms(200);
    SimTime tau = SimTime::from_ms(1000);
    double alpha = 2.0;
    SimTime max_time = SimTime::from_seconds(200);
    CodelConfig codel;
    PieConfig pie;

    bool operator==(const AqmSettings&) const = default;
};

// Fixed-rate server with one FIFO queue and a pluggable drop policy. The
// packet in service has left the buffer: backlog and the AQM snapshot count
// waiting packets only, and a packet's queuing delay is the time from its
// enqueue to the start of its transmission.
class BottleneckLink {
public:
    BottleneckLink(EventQueue& ev, CapacitySchedule schedule, int64_t buffer_limit,
                   const AqmSettings& aqm, uint64_t pie_seed, Metrics& metrics);

    // Called with each departing packet at its service-completion time.
    void set_deliver(std::function<void(const Packet&, SimTime)> deliver) { deliver_ = std::move(deliver); }

    // Runs the AQM decision exactly once, then enqueues or records the drop.
    void on_packet_arrival(Packet&& p, SimTime now);

    void apply_capacity_change(int64_t new_rate, SimTime now);

    QueueSnapshot snapshot(SimTime now) const;

    int64_t current_rate() const { return current_rate_; }
    int64_t waiting_bytes() const { return waiting_bytes_; }
    size_t waiting_packets() const { return waiting_.size(); }
    bool busy() const { return in_service_.has_value(); }
    int64_t accepted_bytes() const { return accepted_bytes_; }
    int64_t departed_bytes() const { return departed_bytes_; }
    int64_t in_service_bytes() const { return in_service_ ? in_service_->size : 0; }

    const AqmSettings& aqm() const { return aqm_; }
    const GspState& gsp_state() const { return gsp_state_; }
    const GspConfig& gsp_config() const { return gsp_config_; }

private:
    void start_service(SimTime now);
    void on_service_complete(SimTime now);
    void record_drop(const Packet& p, SimTime now, DropReason reason);
    void note_backlog_change(SimTime now);
    void schedule_pie_update(SimTime at);

    EventQueue& ev_;
    CapacitySchedule schedule_;
    int64_t current_rate_;
    int64_t buffer_limit_;
    AqmSettings aqm_;
    Metrics& metrics_;
    std::function<void(const Packet&, SimTime)> deliver_;

    std::deque<Packet> waiting_;
    int64_t waiting_bytes_ = 0;
    std::optional<Packet> in_service_;

    GspConfig gsp_config_;
    GspState gsp_state_;
    CodelState codel_state_;
    PieState pie_state_;

    int64_t accepted_bytes_ = 0;
    int64_t departed_bytes_ = 0;
    bool was_empty_ = true;
};

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

struct FlowGroupSetup {
    int count = 0;
    TcpFlavor flavor;
    SimTime rtt0;
    SimTime rtt0_jitter;  // per-flow uniform offset, drawn once at setup;
                          // emulates distinct per-host path lengths
    SimTime start_window = SimTime::from_seconds(1);
    SimTime start_at;
    TcpParams params;
};

struct UdpSourceSetup {
    int64_t rate_bps = 0;
    int32_t packet_size = 1500;
    SimTime start;
    SimTime stop;
};

struct SimSetup {
    SimTime duration;
    uint64_t seed = 1;
    CapacitySchedule capacity;
    int64_t buffer_limit = 0;
    AqmSettings aqm;
    std::vector<FlowGroupSetup> flows;
    std::vector<UdpSourceSetup> udp;
    SimTime stats_interval = SimTime::from_ms(10);
};

// One TCP connection: ack-clocked sender behind the bottleneck, receiver
// reached over a delay pipe, acks returning over an uncongested reverse path.
struct TcpSession {
    TcpSender sender;
    TcpReceiver receiver;
    SimTime fwd_delay;  // after the bottleneck serializes a segment
    SimTime rev_delay;

    SimTime rto_deadline;
    bool rto_armed = false;
    bool rto_event_pending = false;
    SimTime rto_floor;  // 4 x rtt0; the effective timeout follows the
                        // measured RTT so slow acks alone never fire it

    SimTime rto_interval() const {
        const SimTime srtt_based = sender.rtt_estimate().scaled(sender.params.rto_rtt0_multiple);
        return srtt_based > rto_floor ? srtt_based : rto_floor;
    }
};

class Simulation {
public:
    explicit Simulation(const SimSetup& setup);

    void run();  // to setup.duration

    Metrics& metrics() { return metrics_; }
    const Metrics& metrics() const { return metrics_; }
    BottleneckLink& link() { return *link_; }
    EventQueue& events() { return ev_; }
    const std::vector<TcpSession>& sessions() const { return sessions_; }

private:
    void start_flow(size_t idx);
    void deliver_from_link(const Packet& p, SimTime departure);
    void handle_data_at_receiver(size_t idx, Packet p);
    void handle_ack_at_sender(size_t idx, AckInfo ack);
    void send_ack(size_t idx, const AckInfo& ack);
    void emit_new_data(size_t idx);
    void arm_rto(size_t idx);
    void on_rto_timer(size_t idx);
    void udp_emit(size_t idx);
    void stats_tick();

    SimSetup setup_;
    EventQueue ev_;
    Metrics metrics_;
    std::unique_ptr<BottleneckLink> link_;
    std::vector<TcpSession> sessions_;
    std::vector<UdpSourceSetup> udp_;
    std::vector<SimTime> udp_period_;
    uint64_t next_packet_id_ = 1;
    std::mt19937_64 rng_;
};

}  // namespace gspsim

#endif
