#include "qkdmg/net/udp_transport.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <stdexcept>

namespace qkdmg::net {

UdpTransport::~UdpTransport() {
    for (auto& [addr, ep] : endpoints_) {
        if (ep.fd >= 0) {
            ::close(ep.fd);
        }
    }
}

void UdpTransport::register_endpoint(std::uint8_t addr, std::uint16_t port) {
    const int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd < 0) {
        throw std::runtime_error(std::string("socket: ") + std::strerror(errno));
    }
    sockaddr_in local{};
    local.sin_family = AF_INET;
    local.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    local.sin_port = htons(port);
    if (::bind(fd, reinterpret_cast<sockaddr*>(&local), sizeof(local)) != 0) {
        const int err = errno;
        ::close(fd);
        throw std::runtime_error(std::string("bind: ") + std::strerror(err));
    }
    const int flags = ::fcntl(fd, F_GETFL, 0);
    ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
    endpoints_[addr] = {fd, port};
    addr_by_port_[port] = addr;
}

DeliveryReceipt UdpTransport::send(std::uint8_t src, std::uint8_t dst,
                                   std::vector<std::uint8_t> octets, double now) {
    const auto from = endpoints_.find(src);
    const auto to = endpoints_.find(dst);
    if (from == endpoints_.end() || to == endpoints_.end()) {
        throw UnknownEndpoint("datagram endpoint not registered");
    }
    sockaddr_in peer{};
    peer.sin_family = AF_INET;
    peer.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    peer.sin_port = htons(to->second.port);
    const auto sent = ::sendto(from->second.fd, octets.data(), octets.size(), 0,
                               reinterpret_cast<sockaddr*>(&peer), sizeof(peer));
    if (sent < 0 || static_cast<std::size_t>(sent) != octets.size()) {
        throw std::runtime_error(std::string("sendto: ") + std::strerror(errno));
    }
    return {++link_counters_[{src, dst}], now, false};
}

std::vector<Datagram> UdpTransport::poll(std::uint8_t dst, double at_time) {
    std::vector<Datagram> out;
    const auto it = endpoints_.find(dst);
    if (it == endpoints_.end()) {
        return out;
    }
    std::uint8_t buf[2048];
    for (;;) {
        sockaddr_in peer{};
        socklen_t len = sizeof(peer);
        const auto n = ::recvfrom(it->second.fd, buf, sizeof(buf), 0,
                                  reinterpret_cast<sockaddr*>(&peer), &len);
        if (n < 0) {
            break;  // EAGAIN: drained
        }
        Datagram d;
        const auto src = addr_by_port_.find(ntohs(peer.sin_port));
        d.src = src != addr_by_port_.end() ? src->second : 0xFF;
        d.dst = dst;
        d.octets.assign(buf, buf + n);
        d.send_time = at_time;
        d.deliver_time = at_time;
        out.push_back(std::move(d));
    }
    return out;
}

}  // namespace qkdmg::net
