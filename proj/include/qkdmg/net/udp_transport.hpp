#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "qkdmg/net/transport.hpp"

namespace qkdmg::net {

// Loopback datagram layer over real OS sockets: one 127.0.0.1 UDP port
// per emulated endpoint. Same send/poll surface as SimTransport, for
// integration tests against the kernel network stack. Never used by the
// deterministic event loop.
class UdpTransport {
  public:
    UdpTransport() = default;
    ~UdpTransport();
    UdpTransport(const UdpTransport&) = delete;
    UdpTransport& operator=(const UdpTransport&) = delete;

    // Binds the endpoint's port; throws std::runtime_error when the
    // socket cannot be created or bound.
    void register_endpoint(std::uint8_t addr, std::uint16_t port);

    DeliveryReceipt send(std::uint8_t src, std::uint8_t dst, std::vector<std::uint8_t> octets,
                         double now);

    // Non-blocking drain of everything queued on the endpoint's socket.
    std::vector<Datagram> poll(std::uint8_t dst, double at_time);

  private:
    struct Endpoint {
        int fd = -1;
        std::uint16_t port = 0;
    };
    std::map<std::uint8_t, Endpoint> endpoints_;
    std::map<std::uint16_t, std::uint8_t> addr_by_port_;
    std::map<std::pair<std::uint8_t, std::uint8_t>, std::uint64_t> link_counters_;
};

}  // namespace qkdmg::net
