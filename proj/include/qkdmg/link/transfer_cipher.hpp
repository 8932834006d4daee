#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace qkdmg::link {

inline constexpr std::size_t kTransferKeyBytes = 16;
inline constexpr std::size_t kTransferTagBytes = 16;

// Authenticated, length-preserving ciphertext of a key-pool transfer:
// the body has the payload's length, the tag rides alongside.
struct TransferCiphertext {
    std::vector<std::uint8_t> body;
    std::array<std::uint8_t, kTransferTagBytes> tag{};
};

// AES-128-GCM under a single-use 128-bit pool key (fixed nonce; every
// transfer extracts a fresh key). Throws std::invalid_argument on a
// wrong-sized key.
TransferCiphertext block_encrypt_transfer(std::span<const std::uint8_t> payload,
                                          std::span<const std::uint8_t> key);

// Returns the plaintext, or nullopt when authentication fails (tampered
// ciphertext or wrong key).
std::optional<std::vector<std::uint8_t>> block_decrypt_transfer(
    const TransferCiphertext& ciphertext, std::span<const std::uint8_t> key);

}  // namespace qkdmg::link
