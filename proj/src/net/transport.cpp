#include "qkdmg/net/transport.hpp"

#include <algorithm>

namespace qkdmg::net {

void SimTransport::schedule_drop(std::uint8_t src, std::uint8_t dst, std::uint64_t link_seq) {
    drop_schedule_.insert({src, dst, link_seq});
}

DeliveryReceipt SimTransport::send(std::uint8_t src, std::uint8_t dst,
                                   std::vector<std::uint8_t> octets, double now) {
    if (!endpoints_.contains(src) || !endpoints_.contains(dst)) {
        throw UnknownEndpoint("datagram endpoint not registered");
    }
    const std::uint64_t link_seq = ++link_counters_[{src, dst}];
    DeliveryReceipt receipt{link_seq, now + latency_, false};
    if (drop_schedule_.contains({src, dst, link_seq})) {
        drops_.push_back({src, dst, link_seq, now});
        receipt.dropped = true;
        return receipt;
    }
    Datagram d;
    d.src = src;
    d.dst = dst;
    d.octets = std::move(octets);
    d.send_time = now;
    d.deliver_time = receipt.deliver_time;
    d.link_seq = link_seq;
    queues_[dst].push_back(std::move(d));
    return receipt;
}

std::vector<Datagram> SimTransport::poll(std::uint8_t dst, double at_time) {
    std::vector<Datagram> out;
    auto it = queues_.find(dst);
    if (it == queues_.end()) {
        return out;
    }
    auto& q = it->second;
    // Constant latency keeps the queue sorted by deliver_time in send
    // order, so draining the front preserves per-link FIFO.
    while (!q.empty() && q.front().deliver_time <= at_time) {
        out.push_back(std::move(q.front()));
        q.pop_front();
    }
    return out;
}

}  // namespace qkdmg::net
