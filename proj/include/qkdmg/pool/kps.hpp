#pragma once

#include <cstdint>
#include <vector>

#include "qkdmg/pool/key_pool.hpp"

namespace qkdmg::pool {

enum class DonorSelection {
    highest_level,  // highest-level eligible pool, ties to the lowest id
};

// Sharing policy: a pool below its threshold receives `transfer_bits`
// from a donor; the recipient pays `transfer_key_bits` for the cipher
// key protecting the transfer.
struct KpsPolicy {
    std::uint64_t transfer_bits = 20'000;
    std::uint64_t transfer_key_bits = 128;
    DonorSelection donor_selection = DonorSelection::highest_level;

    void validate() const;
};

struct TransferEvent {
    int recipient_id = 0;
    int donor_id = 0;
    std::uint64_t transferred_bits = 0;
    std::uint64_t cipher_key_bits = 0;
    std::uint64_t donor_level_after = 0;
    std::uint64_t recipient_level_after = 0;
    KeyMaterial payload;     // the shared key bits (donor stream slices)
    KeyMaterial cipher_key;  // the recipient-pool key that encrypts them
};

enum class KpsSkipReason {
    no_eligible_donor,     // nobody can give without breaching its own threshold
    recipient_cannot_pay,  // recipient lacks the transfer cipher key bits
};

struct KpsSkip {
    int pool_id = 0;
    std::uint64_t level = 0;
    KpsSkipReason reason = KpsSkipReason::no_eligible_donor;
};

struct KpsOutcome {
    std::vector<TransferEvent> transfers;
    std::vector<KpsSkip> skips;
};

// Runs the sharing check over the pool set: every pool below its own
// threshold receives transfer_bits from the highest-level pool that
// stays above its own threshold after donating. Repeats until no pool
// triggers. A donor never drops to or below its threshold.
KpsOutcome kps_check_and_transfer(std::vector<KeyPool*>& pools, const KpsPolicy& policy);

}  // namespace qkdmg::pool
