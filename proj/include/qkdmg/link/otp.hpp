#pragma once

#include <cstdint>

namespace qkdmg::link {

// One-time-pad transforms over the 64-bit packet payload. Key material
// is single-use; the caller extracts it from a key pool.
inline std::uint64_t otp_encrypt(std::uint64_t payload, std::uint64_t key) noexcept {
    return payload ^ key;
}

inline std::uint64_t otp_decrypt(std::uint64_t ciphertext, std::uint64_t key) noexcept {
    return ciphertext ^ key;
}

// One-time 64-bit authentication tag: polynomial evaluation over
// GF(2^64) keyed by 64 fresh pool bits. Optional; a frame carrying it
// costs 64 extra key bits.
std::uint64_t one_time_tag(std::uint64_t message, std::uint64_t key);

}  // namespace qkdmg::link
