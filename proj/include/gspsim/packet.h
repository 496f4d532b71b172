#ifndef GSPSIM_PACKET_H
#define GSPSIM_PACKET_H

#include <cstdint>
#include <optional>
#include <vector>

#include "gspsim/sim_time.h"

namespace gspsim {

enum class PacketKind { TcpData, TcpAck, Udp };

// Receiver-to-sender acknowledgment payload. Rides on a TcpAck packet over
// the (uncongested) reverse path. `missing` summarizes the holes below the
// highest buffered byte (selective acknowledgment, modeled abstractly).
struct AckInfo {
    uint32_t flow_id = 0;
    int64_t cumulative_ack_seq = 0;
    int64_t newly_acked_bytes = 0;   // 0 exactly when is_duplicate
    bool is_duplicate = false;
    SimTime echo_time;               // send timestamp echoed for RTT measurement
    std::vector<int64_t> missing;    // segment starts the receiver still lacks
};

struct Packet {
    uint64_t id = 0;        // unique, monotonically increasing per run
    uint32_t flow_id = 0;
    PacketKind kind = PacketKind::TcpData;
    int32_t size = 0;       // bytes on the wire
    int64_t seq = 0;        // byte offset (TCP data only)
    SimTime send_time;      // stamped by the sender, echoed in ACKs
    SimTime enqueue_time;   // stamped when the packet enters a queue
    std::optional<AckInfo> ack;
};

}  // namespace gspsim

#endif
