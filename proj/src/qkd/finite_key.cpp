#include "qkdmg/qkd/finite_key.hpp"

#include <algorithm>
#include <cmath>

#include "qkdmg/qkd/channel.hpp"
#include "qkdmg/qkd/statistics.hpp"

namespace qkdmg::qkd {

namespace {

const std::array<std::uint64_t, kNumIntensities>& counts_of(const ObservedStatistics& stats,
                                                            Basis basis, CountKind kind) {
    if (kind == CountKind::detections) {
        return basis == Basis::x ? stats.n_x : stats.n_z;
    }
    return basis == Basis::x ? stats.m_x : stats.m_z;
}

// Statistical-fluctuation correction of the phase-error estimate,
// f(a, b, c, d). Vanishes at b in {0, 1} (the (1-b)b factor) and when
// the inner logarithm is not positive.
double phase_deviation_term(double a, double b, double c, double d) {
    if (b <= 0.0 || b >= 1.0) {
        return 0.0;
    }
    const double inner = std::log2((c + d) / (c * d * (1.0 - b) * b) * (441.0 / (a * a)));
    if (inner <= 0.0) {
        return 0.0;
    }
    return std::sqrt((c + d) * (1.0 - b) * b / (c * d * std::log(2.0)) * inner);
}

}  // namespace

std::array<std::pair<double, double>, kNumIntensities> finite_key_adjusted_counts(
    const ObservedStatistics& stats, const ProtocolParams& p, Basis basis, CountKind kind) {
    const auto& counts = counts_of(stats, basis, kind);
    const auto ks = p.intensities();
    const auto ps = p.intensity_probs();
    const double total = static_cast<double>(counts[0] + counts[1] + counts[2]);
    const double dev = std::sqrt(total / 2.0 * std::log(21.0 / p.eps_s));

    std::array<std::pair<double, double>, kNumIntensities> out;
    for (int i = 0; i < kNumIntensities; ++i) {
        if (ps[i] <= 0.0) {
            throw std::invalid_argument("intensity probability must be positive");
        }
        const double scale = std::exp(ks[i]) / ps[i];
        const double c = static_cast<double>(counts[i]);
        out[i] = {std::max(scale * (c - dev), 0.0), scale * (c + dev)};
    }
    return out;
}

double vacuum_events_bound(const ObservedStatistics& stats, const ProtocolParams& p,
                           Basis basis) {
    if (!(p.k2 > p.k3)) {
        throw std::invalid_argument("vacuum bound requires k2 > k3");
    }
    const auto adj = finite_key_adjusted_counts(stats, p, basis, CountKind::detections);
    const double chi0 = photon_number_prob(0, p);
    const double bound =
        chi0 * (p.k2 * adj[2].first - p.k3 * adj[1].second) / (p.k2 - p.k3);
    return std::max(bound, 0.0);
}

double single_photon_events_bound(const ObservedStatistics& stats, const ProtocolParams& p,
                                  Basis basis, double xi_0) {
    const double denom = p.k1 * (p.k2 - p.k3) - p.k2 * p.k2 + p.k3 * p.k3;
    if (!(denom > 0.0)) {
        throw std::invalid_argument("single-photon bound requires k1(k2-k3) > k2^2 - k3^2");
    }
    const auto adj = finite_key_adjusted_counts(stats, p, basis, CountKind::detections);
    const double chi0 = photon_number_prob(0, p);
    const double chi1 = photon_number_prob(1, p);
    const double ratio = (p.k2 * p.k2 - p.k3 * p.k3) / (p.k1 * p.k1);
    const double bound = chi1 * p.k1 *
                         (adj[1].first - adj[2].second - ratio * (adj[0].second - xi_0 / chi0)) /
                         denom;
    const auto& counts = counts_of(stats, basis, CountKind::detections);
    const double total = static_cast<double>(counts[0] + counts[1] + counts[2]);
    return std::clamp(bound, 0.0, total);
}

double single_photon_errors_bound(const ObservedStatistics& stats, const ProtocolParams& p) {
    const auto adj = finite_key_adjusted_counts(stats, p, Basis::z, CountKind::errors);
    const double chi1 = photon_number_prob(1, p);
    const double bound = chi1 * (adj[1].second - adj[2].first) / (p.k2 - p.k3);
    return std::max(bound, 0.0);
}

double phase_error_bound(const ObservedStatistics& stats, const ProtocolParams& p,
                         double xi_z1, double xi_x1) {
    if (!(xi_z1 > 0.0) || !(xi_x1 > 0.0)) {
        throw InsufficientStatistics("single-photon bounds vanished");
    }
    const double ratio = single_photon_errors_bound(stats, p) / xi_z1;
    const double phi = ratio + phase_deviation_term(p.eps_s, ratio, xi_z1, xi_x1);
    return std::clamp(phi, 0.0, 0.5);
}

KeyRateResult secret_key_length(const ObservedStatistics& stats, const ProtocolParams& p,
                                double pulse_rate) {
    KeyRateResult res;
    res.pulses = stats.pulses;

    res.xi_x0 = vacuum_events_bound(stats, p, Basis::x);
    res.xi_x1 = single_photon_events_bound(stats, p, Basis::x, res.xi_x0);
    res.xi_z0 = vacuum_events_bound(stats, p, Basis::z);
    res.xi_z1 = single_photon_events_bound(stats, p, Basis::z, res.xi_z0);
    res.delta_z1 = single_photon_errors_bound(stats, p);

    try {
        res.phi_x = phase_error_bound(stats, p, res.xi_z1, res.xi_x1);
    } catch (const InsufficientStatistics&) {
        res.insufficient_stats = true;
        return res;
    }

    const double n_x = static_cast<double>(stats.total_n_x());
    const double h_phi = binary_entropy(res.phi_x);
    res.lambda_ec = n_x * p.eta_ec * h_phi;
    const double raw = res.xi_x0 + res.xi_x1 - res.xi_x1 * h_phi - res.lambda_ec -
                       6.0 * std::log2(21.0 / p.eps_s) - std::log2(2.0 / p.eps_c);
    res.ell = static_cast<std::uint64_t>(std::clamp(std::floor(raw), 0.0, n_x));
    if (res.phi_x >= 0.5) {
        // Phase error at the clamp ceiling: nothing extractable.
        res.ell = 0;
    }
    if (pulse_rate > 0.0 && res.pulses > 0) {
        res.speed_bps =
            static_cast<double>(res.ell) * pulse_rate / static_cast<double>(res.pulses);
    }
    return res;
}

KeyRateResult key_generation_speed(const ProtocolParams& p, const ChannelModel& ch) {
    p.validate();
    ch.validate();
    const ObservedStatistics stats = expected_statistics(p, ch);
    return secret_key_length(stats, p, ch.pulse_rate);
}

}  // namespace qkdmg::qkd
