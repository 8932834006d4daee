#include "qkdmg/link/otp.hpp"

namespace qkdmg::link {

namespace {

// Carry-less multiplication reduced modulo x^64 + x^4 + x^3 + x + 1.
std::uint64_t gf64_mul(std::uint64_t a, std::uint64_t b) {
    constexpr std::uint64_t kReduction = 0x1BULL;  // x^4 + x^3 + x + 1
    std::uint64_t acc = 0;
    while (b != 0) {
        if (b & 1U) {
            acc ^= a;
        }
        const bool carry = (a >> 63) != 0;
        a <<= 1;
        if (carry) {
            a ^= kReduction;
        }
        b >>= 1;
    }
    return acc;
}

}  // namespace

std::uint64_t one_time_tag(std::uint64_t message, std::uint64_t key) {
    // key * (message + key): nonzero keys never map distinct messages to
    // the same tag, and the tag leaks nothing about a single-use key.
    return gf64_mul(key, message ^ key);
}

}  // namespace qkdmg::link
