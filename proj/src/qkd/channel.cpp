#include "qkdmg/qkd/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace qkdmg::qkd {

namespace {

void check_probability(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument(std::string(name) + " must be in [0,1]");
    }
}

}  // namespace

void ProtocolParams::validate() const {
    if (!(k3 >= 0.0 && k2 > k3 && k1 > k2 + k3)) {
        throw std::invalid_argument("intensities must satisfy k1 > k2 + k3 and k2 > k3 >= 0");
    }
    check_probability(p_k1, "p_k1");
    check_probability(p_k2, "p_k2");
    check_probability(p_k3, "p_k3");
    if (std::abs(p_k1 + p_k2 + p_k3 - 1.0) > 1e-12) {
        throw std::invalid_argument("intensity probabilities must sum to 1");
    }
    if (p_k1 <= 0.0 || p_k2 <= 0.0 || p_k3 <= 0.0) {
        throw std::invalid_argument("intensity probabilities must be positive");
    }
    if (!(p_x > 0.0 && p_x < 1.0)) {
        throw std::invalid_argument("p_x must be in (0,1)");
    }
    if (n_x_target < 1) {
        throw std::invalid_argument("n_x_target must be >= 1");
    }
    if (!(eps_c > 0.0 && eps_c < 1.0) || !(eps_s > 0.0 && eps_s < 1.0)) {
        throw std::invalid_argument("failure probabilities must be in (0,1)");
    }
    if (eta_ec < 1.0) {
        throw std::invalid_argument("eta_ec must be >= 1");
    }
}

void ChannelModel::validate() const {
    if (length_km < 0.0) {
        throw std::invalid_argument("fiber length must be non-negative");
    }
    check_probability(e_mis, "e_mis");
    check_probability(p_dc, "p_dc");
    check_probability(p_ap, "p_ap");
    if (!(eta_bob > 0.0 && eta_bob <= 1.0)) {
        throw std::invalid_argument("eta_bob must be in (0,1]");
    }
    if (!(pulse_rate > 0.0)) {
        throw std::invalid_argument("pulse_rate must be positive");
    }
}

void ObservedStatistics::validate() const {
    std::uint64_t detected = 0;
    for (int i = 0; i < kNumIntensities; ++i) {
        if (m_x[i] > n_x[i] || m_z[i] > n_z[i]) {
            throw std::invalid_argument("error count exceeds detection count");
        }
        detected += n_x[i] + n_z[i];
    }
    if (pulses < detected) {
        throw std::invalid_argument("pulse count below total detections");
    }
}

double binary_entropy(double x) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::domain_error("binary_entropy argument outside [0,1]");
    }
    if (x == 0.0 || x == 1.0) {
        return 0.0;
    }
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double transmittance(double length_km) {
    if (length_km < 0.0) {
        throw std::domain_error("fiber length must be non-negative");
    }
    return std::pow(10.0, -0.2 * length_km / 10.0);
}

double detection_rate(double intensity, const ChannelModel& ch) {
    const double eta_tr = transmittance(ch.length_km);
    return 1.0 - (1.0 - 2.0 * ch.p_dc) * std::exp(-eta_tr * ch.eta_bob * intensity);
}

double bit_error_prob(double intensity, const ChannelModel& ch) {
    const double eta_tr = transmittance(ch.length_km);
    const double r_k = detection_rate(intensity, ch);
    return ch.p_dc + ch.e_mis * (1.0 - std::exp(-eta_tr * intensity)) + ch.p_ap * r_k / 2.0;
}

double photon_number_prob(unsigned n, const ProtocolParams& p) {
    double factorial = 1.0;
    for (unsigned i = 2; i <= n; ++i) {
        factorial *= static_cast<double>(i);
    }
    double sum = 0.0;
    const auto ks = p.intensities();
    const auto ps = p.intensity_probs();
    for (int i = 0; i < kNumIntensities; ++i) {
        sum += std::exp(-ks[i]) * std::pow(ks[i], static_cast<double>(n)) * ps[i] / factorial;
    }
    return sum;
}

}  // namespace qkdmg::qkd
