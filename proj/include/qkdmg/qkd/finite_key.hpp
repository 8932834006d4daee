#pragma once

#include <array>
#include <stdexcept>
#include <utility>

#include "qkdmg/qkd/types.hpp"

namespace qkdmg::qkd {

// Raised when the single-photon bounds vanish and the phase error rate
// is undefined; secret_key_length converts it into an ell = 0 result.
struct InsufficientStatistics : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Finite-sample (lower, upper) adjustments of the per-intensity counts:
// (e^k / p_k) * (count +- sqrt(total/2 * ln(21/eps_s))), lower floored
// at zero. `total` is the whole-basis count of the same kind.
std::array<std::pair<double, double>, kNumIntensities> finite_key_adjusted_counts(
    const ObservedStatistics& stats, const ProtocolParams& p, Basis basis, CountKind kind);

// Lower bound on the number of vacuum events in the given basis,
// floored at zero. Throws std::invalid_argument when k2 == k3.
double vacuum_events_bound(const ObservedStatistics& stats, const ProtocolParams& p,
                           Basis basis);

// Lower bound on the number of single-photon events in the given basis,
// floored at zero and capped at the basis total. Throws
// std::invalid_argument when the decoy denominator is not positive.
double single_photon_events_bound(const ObservedStatistics& stats, const ProtocolParams& p,
                                  Basis basis, double xi_0);

// Upper bound on the single-photon bit errors in the Z basis, floored
// at zero.
double single_photon_errors_bound(const ObservedStatistics& stats, const ProtocolParams& p);

// Phase error rate of the X-basis single-photon events, estimated from
// Z-basis statistics and clamped to [0, 0.5]. Throws
// InsufficientStatistics when either single-photon bound is <= 0.
double phase_error_bound(const ObservedStatistics& stats, const ProtocolParams& p,
                         double xi_z1, double xi_x1);

// Full secret-key-length evaluation. Insufficient statistics yield
// ell = 0 with the diagnostic flag set instead of an error. When
// pulse_rate is positive the speed field is filled in.
KeyRateResult secret_key_length(const ObservedStatistics& stats, const ProtocolParams& p,
                                double pulse_rate = 0.0);

// Key generation speed of a channel: expected statistics followed by
// the length bound, speed = ell * pulse_rate / pulses.
KeyRateResult key_generation_speed(const ProtocolParams& p, const ChannelModel& ch);

}  // namespace qkdmg::qkd
