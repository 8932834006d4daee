#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

namespace qkdmg::net {

struct UnknownEndpoint : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Datagram {
    std::uint8_t src = 0;
    std::uint8_t dst = 0;
    std::vector<std::uint8_t> octets;
    double send_time = 0.0;
    double deliver_time = 0.0;
    std::uint64_t link_seq = 0;  // 1-based position on the (src, dst) link
};

struct DeliveryReceipt {
    std::uint64_t link_seq = 0;
    double deliver_time = 0.0;
    bool dropped = false;
};

struct DropRecord {
    std::uint8_t src = 0;
    std::uint8_t dst = 0;
    std::uint64_t link_seq = 0;
    double time = 0.0;
};

// In-process datagram layer: fixed configurable latency, per-link FIFO
// delivery, scheduled drops for tests. Never touches the wall clock.
class SimTransport {
  public:
    explicit SimTransport(double latency_s = 0.0) : latency_(latency_s) {}

    void register_endpoint(std::uint8_t addr) { endpoints_.insert(addr); }
    double latency() const { return latency_; }

    // The link_seq-th datagram sent on (src, dst) will be silently
    // dropped (and recorded once).
    void schedule_drop(std::uint8_t src, std::uint8_t dst, std::uint64_t link_seq);

    // Throws UnknownEndpoint when either address is unregistered.
    DeliveryReceipt send(std::uint8_t src, std::uint8_t dst,
                         std::vector<std::uint8_t> octets, double now);

    // All datagrams for `dst` due at or before `at_time`, FIFO per link.
    std::vector<Datagram> poll(std::uint8_t dst, double at_time);

    const std::vector<DropRecord>& drops() const { return drops_; }

  private:
    double latency_;
    std::set<std::uint8_t> endpoints_;
    std::map<std::uint8_t, std::deque<Datagram>> queues_;               // by destination
    std::map<std::pair<std::uint8_t, std::uint8_t>, std::uint64_t> link_counters_;
    std::set<std::tuple<std::uint8_t, std::uint8_t, std::uint64_t>> drop_schedule_;
    std::vector<DropRecord> drops_;
};

}  // namespace qkdmg::net
