#pragma once

#include <cstdint>

#include "qkdmg/qkd/types.hpp"

namespace qkdmg::qkd {

// Deterministic realization of the protocol statistics: expected
// detection and error counts, rounded to integers, over the smallest
// pulse count whose X-basis detections reach the raw-key target.
// Raw-key events require both parties to pick the X basis (p_x^2); the
// Z-basis statistics use (1-p_x)^2. The per-pulse detection probability
// includes the after-pulse multiplier (1 + p_ap).
// Throws std::runtime_error when no intensity can produce detections.
ObservedStatistics expected_statistics(const ProtocolParams& p, const ChannelModel& ch);

// Stochastic variant: each count drawn binomially with the same
// per-pulse probabilities, from a generator seeded with `seed`.
// Identical seeds produce identical statistics.
ObservedStatistics sample_statistics(const ProtocolParams& p, const ChannelModel& ch,
                                     std::uint64_t seed);

// Per-pulse detection probability including after-pulses, and the
// matching per-pulse error probability, for one intensity. Exposed for
// tests that check binomial moments.
double per_pulse_detection_prob(double intensity, const ChannelModel& ch);

}  // namespace qkdmg::qkd
