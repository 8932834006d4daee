#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>

namespace qkdmg::link {

inline constexpr std::size_t kFrameOctets = 20;
inline constexpr std::uint64_t kPacketKeyBits = 64;

enum class CipherMode : std::uint8_t {
    plain = 0,
    otp = 1,
    block = 2,
};

struct MalformedFrame : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One 64-bit-payload control or measurement packet. On the wire:
// seq(4) | src(1) | dst(1) | mode(1) | reserved(1) | payload(8) | tag(4),
// big-endian, 20 octets total. The tag field carries the low 32 bits of
// the 64-bit authentication tag and is zero when absent.
struct Frame {
    std::uint32_t seq = 0;
    std::uint8_t src = 0;
    std::uint8_t dst = 0;
    CipherMode mode = CipherMode::plain;
    std::uint64_t payload = 0;
    std::uint64_t tag = 0;
    bool has_tag = false;
};

std::array<std::uint8_t, kFrameOctets> frame_encode(const Frame& f);

// Throws MalformedFrame on wrong length or unknown mode tag.
Frame frame_decode(std::span<const std::uint8_t> octets);

// Fixed-point encoding of a (P, Q) reference pair into the 64-bit
// payload: two 32-bit two's-complement fields at 0.001 MW / MVar
// resolution.
std::uint64_t encode_power_refs(double p_mw, double q_mvar);
std::pair<double, double> decode_power_refs(std::uint64_t payload);

}  // namespace qkdmg::link
