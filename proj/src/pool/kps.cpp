#include "qkdmg/pool/kps.hpp"

#include <algorithm>
#include <stdexcept>

namespace qkdmg::pool {

void KpsPolicy::validate() const {
    if (transfer_bits <= transfer_key_bits) {
        throw std::invalid_argument("transfer size must exceed the transfer key size");
    }
}

namespace {

KeyPool* select_donor(std::vector<KeyPool*>& pools, const KeyPool& recipient,
                      std::uint64_t transfer_bits) {
    KeyPool* best = nullptr;
    for (KeyPool* candidate : pools) {
        if (candidate->id() == recipient.id()) {
            continue;
        }
        // Eligible only when the post-donation level stays above the
        // donor's own threshold.
        if (candidate->level() < transfer_bits ||
            candidate->level() - transfer_bits <= candidate->threshold()) {
            continue;
        }
        if (best == nullptr || candidate->level() > best->level() ||
            (candidate->level() == best->level() && candidate->id() < best->id())) {
            best = candidate;
        }
    }
    return best;
}

}  // namespace

KpsOutcome kps_check_and_transfer(std::vector<KeyPool*>& pools, const KpsPolicy& policy) {
    policy.validate();
    KpsOutcome outcome;
    if (pools.size() < 2) {
        return outcome;
    }

    bool changed = true;
    std::vector<int> skipped;  // pools already reported this invocation
    while (changed) {
        changed = false;
        for (KeyPool* recipient : pools) {
            if (!recipient->below_threshold()) {
                continue;
            }
            if (std::find(skipped.begin(), skipped.end(), recipient->id()) != skipped.end()) {
                continue;
            }
            KeyPool* donor = select_donor(pools, *recipient, policy.transfer_bits);
            if (donor == nullptr) {
                outcome.skips.push_back(
                    {recipient->id(), recipient->level(), KpsSkipReason::no_eligible_donor});
                skipped.push_back(recipient->id());
                continue;
            }
            if (recipient->level() < policy.transfer_key_bits) {
                outcome.skips.push_back(
                    {recipient->id(), recipient->level(), KpsSkipReason::recipient_cannot_pay});
                skipped.push_back(recipient->id());
                continue;
            }

            TransferEvent ev;
            ev.recipient_id = recipient->id();
            ev.donor_id = donor->id();
            ev.transferred_bits = policy.transfer_bits;
            ev.cipher_key_bits = policy.transfer_key_bits;
            ev.payload = *donor->extract(policy.transfer_bits);
            ev.cipher_key = *recipient->extract(policy.transfer_key_bits);
            recipient->deposit(ev.payload);
            ev.donor_level_after = donor->level();
            ev.recipient_level_after = recipient->level();
            outcome.transfers.push_back(std::move(ev));
            changed = true;
        }
    }
    return outcome;
}

}  // namespace qkdmg::pool
