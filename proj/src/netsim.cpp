#include "gspsim/netsim.h"

#include <algorithm>
#include <stdexcept>

namespace gspsim {

const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::Arrival: return "arrival";
        case EventKind::ServiceComplete: return "service_complete";
        case EventKind::DelackTimer: return "delack_timer";
        case EventKind::RtoTimer: return "rto_timer";
        case EventKind::UdpEmit: return "udp_emit";
        case EventKind::CapacityChange: return "capacity_change";
        case EventKind::StatsTick: return "stats_tick";
    }
    return "?";
}

const char* aqm_kind_name(AqmKind k) {
    switch (k) {
        case AqmKind::TailDrop: return "taildrop";
        case AqmKind::GspBasic: return "gsp_basic";
        case AqmKind::GspAdaptive: return "gsp_adaptive";
        case AqmKind::Codel: return "codel";
        case AqmKind::Pie: return "pie";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// EventQueue
// ---------------------------------------------------------------------------

void EventQueue::schedule(SimTime t, EventKind kind, uint64_t tie_id, std::function<void()> fn) {
    if (t < now_) throw std::logic_error("event scheduled into the past");
    Entry e{t, static_cast<int>(kind), tie_id, next_seq_++,
            std::make_shared<std::function<void()>>(std::move(fn))};
    heap_.push(std::move(e));
}

void EventQueue::run_until(SimTime t_end) {
    while (!heap_.empty() && heap_.top().time <= t_end) {
        Entry e = heap_.top();
        heap_.pop();
        now_ = e.time;
        ring_[ring_count_++ % ring_.size()] = {e.time, static_cast<EventKind>(e.klass), e.tie_id};
        (*e.fn)();
    }
    if (t_end > now_) now_ = t_end;
}

std::vector<EventQueue::TraceEntry> EventQueue::recent_events() const {
    std::vector<TraceEntry> out;
    const size_t n = std::min(ring_count_, ring_.size());
    for (size_t i = 0; i < n; ++i) out.push_back(ring_[(ring_count_ - n + i) % ring_.size()]);
    return out;
}

// ---------------------------------------------------------------------------
// BottleneckLink
// ---------------------------------------------------------------------------

BottleneckLink::BottleneckLink(EventQueue& ev, CapacitySchedule schedule, int64_t buffer_limit,
                               const AqmSettings& aqm, uint64_t pie_seed, Metrics& metrics)
    : ev_(ev),
      schedule_(std::move(schedule)),
      buffer_limit_(buffer_limit),
      aqm_(aqm),
      metrics_(metrics),
      pie_state_(pie_seed) {
    validate_schedule(schedule_);
    if (buffer_limit_ <= 0) throw std::invalid_argument("buffer_limit must be positive");
    current_rate_ = schedule_.front().rate_bps;

    if (aqm_.kind == AqmKind::GspBasic || aqm_.kind == AqmKind::GspAdaptive) {
        gsp_config_.threshold = aqm_.threshold;
        gsp_config_.preset_interval = aqm_.preset_interval;
        gsp_config_.tau = aqm_.tau;
        gsp_config_.alpha = aqm_.alpha;
        gsp_config_.max_time = aqm_.max_time;
        gsp_config_.buffer_limit = buffer_limit_;
        gsp_config_.adaptive = aqm_.kind == AqmKind::GspAdaptive;
        gsp_config_.validate();
        gsp_state_ = GspState::initial(gsp_config_);
    }
    if (aqm_.kind == AqmKind::Pie) schedule_pie_update(ev_.now() + aqm_.pie.update_period);
}

void BottleneckLink::schedule_pie_update(SimTime at) {
    ev_.schedule(at, EventKind::StatsTick, 1, [this] {
        const double est_delay = static_cast<double>(waiting_bytes_) / static_cast<double>(current_rate_);
        pie_update_probability(pie_state_, aqm_.pie, est_delay);
        schedule_pie_update(ev_.now() + aqm_.pie.update_period);
    });
}

QueueSnapshot BottleneckLink::snapshot(SimTime) const {
    QueueSnapshot q;
    q.backlog_bytes = waiting_bytes_;
    q.backlog_packets = static_cast<int64_t>(waiting_.size());
    if (!waiting_.empty()) q.head_arrival_time = waiting_.front().enqueue_time;
    q.buffer_limit = buffer_limit_;
    return q;
}

void BottleneckLink::note_backlog_change(SimTime now) {
    const bool empty = waiting_bytes_ == 0;
    if (empty != was_empty_) {
        metrics_.qlen_transitions.push_back({now, waiting_bytes_});
        was_empty_ = empty;
    }
}

void BottleneckLink::record_drop(const Packet& p, SimTime now, DropReason reason) {
    metrics_.drops.push_back({now, p.flow_id, reason});
}

void BottleneckLink::on_packet_arrival(Packet&& p, SimTime now) {
    const QueueSnapshot q = snapshot(now);

    Verdict verdict = Verdict::Accept;
    DropReason reason = DropReason::Overflow;
    switch (aqm_.kind) {
        case AqmKind::TailDrop:
            verdict = taildrop_decide(q, p.size);
            break;
        case AqmKind::GspBasic:
        case AqmKind::GspAdaptive:
            if (gsp_config_.adaptive) gsp_update_clock(gsp_state_, gsp_config_, q, now);
            verdict = gsp_decide(gsp_state_, gsp_config_, q, p.size, now);
            reason = verdict == Verdict::DropThreshold ? DropReason::Threshold : DropReason::Overflow;
            break;
        case AqmKind::Codel:
            // CoDel drops at dequeue; arrivals face only the buffer limit.
            verdict = taildrop_decide(q, p.size);
            break;
        case AqmKind::Pie: {
            const double est_delay = static_cast<double>(waiting_bytes_) / static_cast<double>(current_rate_);
            verdict = pie_decide(pie_state_, aqm_.pie, q, p.size, est_delay);
            reason = verdict == Verdict::DropThreshold ? DropReason::PieMark : DropReason::Overflow;
            break;
        }
    }

    if (verdict != Verdict::Accept) {
        record_drop(p, now, reason);
        return;
    }

    p.enqueue_time = now;
    waiting_bytes_ += p.size;
    accepted_bytes_ += p.size;
    waiting_.push_back(std::move(p));
    note_backlog_change(now);
    if (!in_service_) start_service(now);
}

void BottleneckLink::start_service(SimTime now) {
    std::optional<Packet> next;
    if (aqm_.kind == AqmKind::Codel) {
        std::vector<Packet> dropped;
        next = codel_dequeue(codel_state_, aqm_.codel, waiting_, waiting_bytes_, now, dropped);
        for (const Packet& d : dropped) record_drop(d, now, DropReason::CodelMark);
    } else if (!waiting_.empty()) {
        next = std::move(waiting_.front());
        waiting_.pop_front();
        waiting_bytes_ -= next->size;
    }
    note_backlog_change(now);
    if (!next) return;

    metrics_.delays.push_back({now, (now - next->enqueue_time).seconds(), next->flow_id});
    const SimTime done = now + transmission_time(next->size, current_rate_);
    in_service_ = std::move(next);
    ev_.schedule(done, EventKind::ServiceComplete, 0, [this] { on_service_complete(ev_.now()); });
}

void BottleneckLink::on_service_complete(SimTime now) {
    if (!in_service_) throw std::logic_error("service completion with no packet in service");
    Packet done = std::move(*in_service_);
    in_service_.reset();
    departed_bytes_ += done.size;
    metrics_.departures.emplace_back(now, done.size);
    if (deliver_) deliver_(done, now);
    if (!waiting_.empty()) start_service(now);
}

void BottleneckLink::apply_capacity_change(int64_t new_rate, SimTime now) {
    if (new_rate <= 0) throw std::invalid_argument("capacity must be positive");
    (void)now;  // the packet in service keeps its originally scheduled finish
    current_rate_ = new_rate;
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

Simulation::Simulation(const SimSetup& setup) : setup_(setup), rng_(setup.seed) {
    link_ = std::make_unique<BottleneckLink>(ev_, setup_.capacity, setup_.buffer_limit, setup_.aqm,
                                             setup_.seed ^ 0x9e3779b97f4a7c15ull, metrics_);
    link_->set_deliver([this](const Packet& p, SimTime t) { deliver_from_link(p, t); });

    // TCP sessions, one per flow, ids 0..N-1 in group order. Start times are
    // jittered inside each group's window; this is the run's only randomness.
    uint32_t flow_id = 0;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (const auto& group : setup_.flows) {
        for (int i = 0; i < group.count; ++i, ++flow_id) {
            const SimTime start = group.start_at + group.start_window.scaled(unit(rng_));
            const SimTime rtt0 = group.rtt0 + group.rtt0_jitter.scaled(unit(rng_));

            TcpSession sess;
            sess.sender = TcpSender::make(flow_id, group.flavor, rtt0, group.params);
            sess.receiver.flow_id = flow_id;
            sess.receiver.mss = group.params.mss;
            sess.fwd_delay = rtt0.scaled(0.5);
            sess.rev_delay = rtt0 - sess.fwd_delay;
            sess.rto_floor = rtt0.scaled(group.params.rto_rtt0_multiple);
            sessions_.push_back(std::move(sess));

            const size_t idx = sessions_.size() - 1;
            ev_.schedule(start, EventKind::Arrival, flow_id, [this, idx] { start_flow(idx); });
        }
    }

    udp_ = setup_.udp;
    for (size_t u = 0; u < udp_.size(); ++u) {
        udp_period_.push_back(transmission_time(udp_[u].packet_size, udp_[u].rate_bps));
        ev_.schedule(udp_[u].start, EventKind::UdpEmit, flow_id + u, [this, u] { udp_emit(u); });
    }

    for (size_t i = 1; i < setup_.capacity.size(); ++i) {
        const RateStep step = setup_.capacity[i];
        ev_.schedule(step.at, EventKind::CapacityChange, 0,
                     [this, step] { link_->apply_capacity_change(step.rate_bps, ev_.now()); });
    }

    if (setup_.stats_interval > SimTime())
        ev_.schedule(SimTime(), EventKind::StatsTick, 0, [this] { stats_tick(); });
}

void Simulation::run() { ev_.run_until(setup_.duration); }

void Simulation::start_flow(size_t idx) {
    emit_new_data(idx);
}

void Simulation::emit_new_data(size_t idx) {
    TcpSession& sess = sessions_[idx];
    auto packets = sender_emit(sess.sender, ev_.now(), next_packet_id_);
    for (auto& p : packets) link_->on_packet_arrival(std::move(p), ev_.now());
    if (sess.sender.flight > 0) arm_rto(idx);
}

void Simulation::deliver_from_link(const Packet& p, SimTime departure) {
    if (p.kind == PacketKind::Udp) return;  // sink
    const size_t idx = p.flow_id;
    const SimTime at = departure + sessions_[idx].fwd_delay;
    Packet copy = p;
    ev_.schedule(at, EventKind::Arrival, p.id,
                 [this, idx, copy = std::move(copy)] { handle_data_at_receiver(idx, copy); });
}

void Simulation::handle_data_at_receiver(size_t idx, Packet p) {
    TcpSession& sess = sessions_[idx];
    auto res = receiver_on_data(sess.receiver, p.seq, p.size, p.send_time, ev_.now(),
                                sess.sender.params.delack_timeout);
    if (res.ack) send_ack(idx, *res.ack);
    if (res.schedule_delack_at) {
        ev_.schedule(*res.schedule_delack_at, EventKind::DelackTimer, sess.receiver.flow_id, [this, idx] {
            auto ack = receiver_delack_fire(sessions_[idx].receiver, ev_.now());
            if (ack) send_ack(idx, *ack);
        });
    }
}

void Simulation::send_ack(size_t idx, const AckInfo& ack) {
    TcpSession& sess = sessions_[idx];
    const SimTime at = ev_.now() + sess.rev_delay;
    ev_.schedule(at, EventKind::Arrival, next_packet_id_++,
                 [this, idx, ack] { handle_ack_at_sender(idx, ack); });
}

void Simulation::handle_ack_at_sender(size_t idx, AckInfo ack) {
    TcpSession& sess = sessions_[idx];
    auto actions = sender_on_ack(sess.sender, ack, ev_.now());
    for (int64_t seq : actions.retransmit_seqs) {
        Packet p = sender_emit_retransmit(sess.sender, seq, ev_.now(), next_packet_id_);
        link_->on_packet_arrival(std::move(p), ev_.now());
    }
    emit_new_data(idx);
    if (sess.sender.flight > 0) {
        arm_rto(idx);
    } else {
        sess.rto_armed = false;
    }
}

void Simulation::arm_rto(size_t idx) {
    TcpSession& sess = sessions_[idx];
    sess.rto_deadline = ev_.now() + sess.rto_interval();
    sess.rto_armed = true;
    if (!sess.rto_event_pending) {
        sess.rto_event_pending = true;
        ev_.schedule(sess.rto_deadline, EventKind::RtoTimer, sess.sender.flow_id,
                     [this, idx] { on_rto_timer(idx); });
    }
}

void Simulation::on_rto_timer(size_t idx) {
    TcpSession& sess = sessions_[idx];
    sess.rto_event_pending = false;
    if (!sess.rto_armed) return;
    if (ev_.now() < sess.rto_deadline) {
        // The deadline moved forward since this timer was set; chase it.
        sess.rto_event_pending = true;
        ev_.schedule(sess.rto_deadline, EventKind::RtoTimer, sess.sender.flow_id,
                     [this, idx] { on_rto_timer(idx); });
        return;
    }
    if (sess.sender.flight <= 0) {
        sess.rto_armed = false;
        return;
    }
    const int64_t seq = sender_on_rto(sess.sender, ev_.now());
    Packet p = sender_emit_retransmit(sess.sender, seq, ev_.now(), next_packet_id_);
    link_->on_packet_arrival(std::move(p), ev_.now());
    emit_new_data(idx);
    arm_rto(idx);
}

void Simulation::udp_emit(size_t idx) {
    const UdpSourceSetup& src = udp_[idx];
    if (ev_.now() >= src.stop) return;
    Packet p;
    p.id = next_packet_id_++;
    p.flow_id = static_cast<uint32_t>(sessions_.size() + idx);
    p.kind = PacketKind::Udp;
    p.size = src.packet_size;
    p.send_time = ev_.now();
    link_->on_packet_arrival(std::move(p), ev_.now());
    ev_.schedule(ev_.now() + udp_period_[idx], EventKind::UdpEmit, p.flow_id,
                 [this, idx] { udp_emit(idx); });
}

void Simulation::stats_tick() {
    metrics_.qlen_samples.push_back({ev_.now(), link_->waiting_bytes()});
    if (setup_.aqm.kind == AqmKind::GspAdaptive) {
        const GspState& st = link_->gsp_state();
        metrics_.gsp_trace.push_back({ev_.now(), st.interval.seconds(), st.cumul_time.seconds()});
    }
    const SimTime next = ev_.now() + setup_.stats_interval;
    if (next <= setup_.duration)
        ev_.schedule(next, EventKind::StatsTick, 0, [this] { stats_tick(); });
}

}  // namespace gspsim
