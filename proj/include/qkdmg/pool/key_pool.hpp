#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

namespace qkdmg::pool {

// Deterministic keystream word i of the stream identified by `seed`
// (counter-mode splitmix64). Pools reference key bits by (seed, offset)
// instead of materializing them, so replays are bit-exact at any scale.
std::uint64_t keystream_word(std::uint64_t seed, std::uint64_t index);

// A contiguous run of key bits inside one keystream.
struct KeySlice {
    std::uint64_t stream_seed = 0;
    std::uint64_t bit_offset = 0;
    std::uint64_t bit_count = 0;
};

// Extracted key bits: the slices they came from plus the materialized
// bytes (MSB-first packing, zero-padded in the final byte).
struct KeyMaterial {
    std::vector<KeySlice> slices;
    std::vector<std::uint8_t> bytes;
    std::uint64_t bit_count = 0;

    // First 64 bits as a big-endian word; requires bit_count >= 64.
    std::uint64_t as_u64() const;
};

// Materializes the bytes of a slice list.
std::vector<std::uint8_t> materialize(const std::vector<KeySlice>& slices);

// FIFO reservoir of secret key bits. Deposits append either fresh bits
// of the pool's own keystream (QKD blocks) or slices transferred from
// another pool; extraction is all-or-nothing and each bit leaves the
// pool exactly once.
class KeyPool {
  public:
    KeyPool(int id, std::uint64_t stream_seed, std::uint64_t threshold_bits,
            std::optional<std::uint64_t> capacity_bits = std::nullopt);

    int id() const { return id_; }
    std::uint64_t level() const { return level_; }
    std::uint64_t threshold() const { return threshold_; }
    std::uint64_t stream_seed() const { return stream_seed_; }
    std::uint64_t total_deposited() const { return total_deposited_; }
    std::uint64_t total_extracted() const { return total_extracted_; }
    bool below_threshold() const { return level_ < threshold_; }

    // Appends `bits` fresh bits of the pool's own stream. Returns the
    // number of bits truncated by the capacity limit (0 normally).
    std::uint64_t deposit(std::uint64_t bits);

    // Appends transferred material. Returns the truncated bit count.
    std::uint64_t deposit(const KeyMaterial& material);

    // Removes exactly `bits` bits FIFO, or nothing at all on shortage.
    std::optional<KeyMaterial> extract(std::uint64_t bits);

  private:
    std::uint64_t free_space() const;
    void push_slice(const KeySlice& slice);

    int id_;
    std::uint64_t stream_seed_;
    std::uint64_t threshold_;
    std::optional<std::uint64_t> capacity_;
    std::uint64_t level_ = 0;
    std::uint64_t total_deposited_ = 0;
    std::uint64_t total_extracted_ = 0;
    std::uint64_t own_cursor_ = 0;  // next unused bit of the own stream
    std::deque<KeySlice> segments_;
};

}  // namespace qkdmg::pool
