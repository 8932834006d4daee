#pragma once

#include "qkdmg/qkd/types.hpp"

namespace qkdmg::qkd {

// Binary entropy h(x) = -x log2(x) - (1-x) log2(1-x), with h(0)=h(1)=0.
// Throws std::domain_error outside [0, 1].
double binary_entropy(double x);

// Fiber transmittance 10^(-0.2 L / 10) at 0.2 dB/km attenuation.
// Throws std::domain_error for negative lengths.
double transmittance(double length_km);

// Expected detection rate for a pulse of the given intensity, excluding
// after-pulse contributions.
double detection_rate(double intensity, const ChannelModel& ch);

// Per-pulse bit-error probability for the given intensity. The
// misalignment term uses the fiber transmittance without the detector
// efficiency.
double bit_error_prob(double intensity, const ChannelModel& ch);

// Probability that the source emits an n-photon pulse under the
// intensity mixture (Poisson photon statistics).
double photon_number_prob(unsigned n, const ProtocolParams& p);

}  // namespace qkdmg::qkd
