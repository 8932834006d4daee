#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "qkdmg/pool/kps.hpp"

namespace qkdmg::sim {

struct PoolSample {
    double t = 0.0;
    int pool_id = 0;
    std::uint64_t level = 0;
};

struct DepositRecord {
    double t = 0.0;
    int pool_id = 0;
    std::uint64_t bits = 0;
    std::uint64_t level_after = 0;
};

enum class PacketKind { measurement, control, attack };
enum class PacketOutcome { delivered, applied, suppressed, rejected, dropped };

struct PacketRecord {
    double t = 0.0;
    std::uint32_t seq = 0;
    std::uint8_t src = 0;
    std::uint8_t dst = 0;
    PacketKind kind = PacketKind::measurement;
    PacketOutcome outcome = PacketOutcome::delivered;
};

// Maximal period during which the channel could not fund a packet key:
// opens at the first suppressed packet, closes at the next successful
// extraction.
struct ExhaustionInterval {
    int channel_id = 0;
    double start = 0.0;
    double end = 0.0;
    bool truncated = false;  // still open when the run ended
    std::uint64_t start_level = 0;
};

struct TransferRecord {
    double t = 0.0;
    int recipient_id = 0;
    int donor_id = 0;
    std::uint64_t bits = 0;
    std::uint64_t key_cost = 0;
    std::uint64_t donor_level_after = 0;
    std::uint64_t recipient_level_after = 0;
};

struct KpsSkipRecord {
    double t = 0.0;
    int pool_id = 0;
    std::uint64_t level = 0;
    pool::KpsSkipReason reason = pool::KpsSkipReason::no_eligible_donor;
};

struct ReferenceChange {
    double t = 0.0;
    int channel_id = 0;
    double p_mw = 0.0;
    double q_mvar = 0.0;
    bool attacker = false;
    std::uint64_t pool_level = 0;
};

struct CompromisedInterval {
    int channel_id = 0;
    double start = 0.0;
    double end = 0.0;
    bool truncated = false;
};

struct OverflowRecord {
    double t = 0.0;
    int pool_id = 0;
    std::uint64_t bits_lost = 0;
};

struct ChannelTotals {
    std::uint64_t measurements_sent = 0;
    std::uint64_t controls_applied = 0;
    std::uint64_t controls_sent = 0;
    std::uint64_t shortages = 0;
    std::uint64_t qkd_deposited_bits = 0;
    std::uint64_t packet_key_bits = 0;
    std::uint64_t transfer_key_bits = 0;   // cipher-key cost paid by this pool
    std::uint64_t transfer_in_bits = 0;
    std::uint64_t transfer_out_bits = 0;
    std::uint64_t overflow_bits = 0;
    std::uint64_t attack_frames = 0;
    std::uint64_t attacks_applied = 0;
    std::uint64_t final_level = 0;
    std::uint64_t block_bits = 0;     // secret bits per key block at the initial noise level
    double block_period_s = 0.0;      // pulses-to-target / pulse_rate
};

struct Trace {
    double duration_s = 0.0;
    std::vector<PoolSample> pool_samples;
    std::vector<DepositRecord> deposits;
    std::vector<PacketRecord> packets;
    std::vector<ExhaustionInterval> exhaustions;
    std::vector<TransferRecord> transfers;
    std::vector<KpsSkipRecord> kps_skips;
    std::vector<ReferenceChange> reference_changes;
    std::vector<CompromisedInterval> compromised;
    std::vector<OverflowRecord> overflows;
    std::map<int, ChannelTotals> totals;

    std::vector<ExhaustionInterval> exhaustions_of(int channel_id) const;
    double total_exhausted_time(int channel_id) const;
    bool ever_compromised(int channel_id) const;
};

}  // namespace qkdmg::sim
