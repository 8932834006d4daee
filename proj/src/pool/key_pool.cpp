#include "qkdmg/pool/key_pool.hpp"

#include <limits>
#include <stdexcept>

namespace qkdmg::pool {

std::uint64_t keystream_word(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::vector<std::uint8_t> materialize(const std::vector<KeySlice>& slices) {
    std::uint64_t total = 0;
    for (const auto& s : slices) {
        total += s.bit_count;
    }
    std::vector<std::uint8_t> bytes((total + 7) / 8, 0);
    std::uint64_t out_bit = 0;
    for (const auto& s : slices) {
        for (std::uint64_t j = 0; j < s.bit_count; ++j) {
            const std::uint64_t pos = s.bit_offset + j;
            const std::uint64_t word = keystream_word(s.stream_seed, pos / 64);
            const int bit = static_cast<int>((word >> (63 - (pos % 64))) & 1U);
            if (bit != 0) {
                bytes[out_bit / 8] |= static_cast<std::uint8_t>(0x80U >> (out_bit % 8));
            }
            ++out_bit;
        }
    }
    return bytes;
}

std::uint64_t KeyMaterial::as_u64() const {
    if (bit_count < 64 || bytes.size() < 8) {
        throw std::logic_error("key material shorter than 64 bits");
    }
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v = (v << 8) | bytes[static_cast<std::size_t>(i)];
    }
    return v;
}

KeyPool::KeyPool(int id, std::uint64_t stream_seed, std::uint64_t threshold_bits,
                 std::optional<std::uint64_t> capacity_bits)
    : id_(id), stream_seed_(stream_seed), threshold_(threshold_bits), capacity_(capacity_bits) {}

std::uint64_t KeyPool::free_space() const {
    if (!capacity_) {
        return std::numeric_limits<std::uint64_t>::max() - level_;
    }
    return *capacity_ > level_ ? *capacity_ - level_ : 0;
}

void KeyPool::push_slice(const KeySlice& slice) {
    if (slice.bit_count == 0) {
        return;
    }
    // Merge with the tail when the new slice continues the same stream.
    if (!segments_.empty()) {
        auto& tail = segments_.back();
        if (tail.stream_seed == slice.stream_seed &&
            tail.bit_offset + tail.bit_count == slice.bit_offset) {
            tail.bit_count += slice.bit_count;
            return;
        }
    }
    segments_.push_back(slice);
}

std::uint64_t KeyPool::deposit(std::uint64_t bits) {
    const std::uint64_t accepted = std::min(bits, free_space());
    push_slice({stream_seed_, own_cursor_, accepted});
    own_cursor_ += bits;  // overflowed bits are discarded, never reused
    level_ += accepted;
    total_deposited_ += accepted;
    return bits - accepted;
}

std::uint64_t KeyPool::deposit(const KeyMaterial& material) {
    std::uint64_t space = free_space();
    std::uint64_t accepted = 0;
    for (const auto& s : material.slices) {
        const std::uint64_t take = std::min(s.bit_count, space);
        push_slice({s.stream_seed, s.bit_offset, take});
        accepted += take;
        space -= take;
    }
    level_ += accepted;
    total_deposited_ += accepted;
    return material.bit_count - accepted;
}

std::optional<KeyMaterial> KeyPool::extract(std::uint64_t bits) {
    if (bits == 0 || bits > level_) {
        return std::nullopt;
    }
    KeyMaterial out;
    out.bit_count = bits;
    std::uint64_t remaining = bits;
    while (remaining > 0) {
        KeySlice& head = segments_.front();
        const std::uint64_t take = std::min(head.bit_count, remaining);
        out.slices.push_back({head.stream_seed, head.bit_offset, take});
        head.bit_offset += take;
        head.bit_count -= take;
        remaining -= take;
        if (head.bit_count == 0) {
            segments_.pop_front();
        }
    }
    out.bytes = materialize(out.slices);
    level_ -= bits;
    total_extracted_ += bits;
    return out;
}

}  // namespace qkdmg::pool
