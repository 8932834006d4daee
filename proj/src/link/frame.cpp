#include "qkdmg/link/frame.hpp"

#include <cmath>

namespace qkdmg::link {

namespace {

void put_u32(std::uint8_t* out, std::uint32_t v) {
    out[0] = static_cast<std::uint8_t>(v >> 24);
    out[1] = static_cast<std::uint8_t>(v >> 16);
    out[2] = static_cast<std::uint8_t>(v >> 8);
    out[3] = static_cast<std::uint8_t>(v);
}

std::uint32_t get_u32(const std::uint8_t* in) {
    return (static_cast<std::uint32_t>(in[0]) << 24) | (static_cast<std::uint32_t>(in[1]) << 16) |
           (static_cast<std::uint32_t>(in[2]) << 8) | static_cast<std::uint32_t>(in[3]);
}

}  // namespace

std::array<std::uint8_t, kFrameOctets> frame_encode(const Frame& f) {
    std::array<std::uint8_t, kFrameOctets> out{};
    put_u32(out.data(), f.seq);
    out[4] = f.src;
    out[5] = f.dst;
    out[6] = static_cast<std::uint8_t>(f.mode);
    out[7] = 0;  // reserved
    put_u32(out.data() + 8, static_cast<std::uint32_t>(f.payload >> 32));
    put_u32(out.data() + 12, static_cast<std::uint32_t>(f.payload));
    put_u32(out.data() + 16, f.has_tag ? static_cast<std::uint32_t>(f.tag) : 0U);
    return out;
}

Frame frame_decode(std::span<const std::uint8_t> octets) {
    if (octets.size() != kFrameOctets) {
        throw MalformedFrame("datagram is not " + std::to_string(kFrameOctets) + " octets");
    }
    Frame f;
    f.seq = get_u32(octets.data());
    f.src = octets[4];
    f.dst = octets[5];
    const std::uint8_t mode = octets[6];
    if (mode > static_cast<std::uint8_t>(CipherMode::block)) {
        throw MalformedFrame("unknown cipher mode tag");
    }
    f.mode = static_cast<CipherMode>(mode);
    f.payload = (static_cast<std::uint64_t>(get_u32(octets.data() + 8)) << 32) |
                get_u32(octets.data() + 12);
    f.tag = get_u32(octets.data() + 16);
    f.has_tag = f.tag != 0;
    return f;
}

std::uint64_t encode_power_refs(double p_mw, double q_mvar) {
    const auto p_fixed = static_cast<std::int32_t>(std::llround(p_mw * 1000.0));
    const auto q_fixed = static_cast<std::int32_t>(std::llround(q_mvar * 1000.0));
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(p_fixed)) << 32) |
           static_cast<std::uint32_t>(q_fixed);
}

std::pair<double, double> decode_power_refs(std::uint64_t payload) {
    const auto p_fixed = static_cast<std::int32_t>(static_cast<std::uint32_t>(payload >> 32));
    const auto q_fixed = static_cast<std::int32_t>(static_cast<std::uint32_t>(payload));
    return {static_cast<double>(p_fixed) / 1000.0, static_cast<double>(q_fixed) / 1000.0};
}

}  // namespace qkdmg::link
