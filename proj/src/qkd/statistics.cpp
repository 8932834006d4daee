#include "qkdmg/qkd/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "qkdmg/qkd/channel.hpp"

namespace qkdmg::qkd {

namespace {

struct PulseProbs {
    std::array<double, kNumIntensities> detect;  // R_k, with after-pulses
    std::array<double, kNumIntensities> error;   // b_k
};

PulseProbs pulse_probs(const ProtocolParams& p, const ChannelModel& ch) {
    PulseProbs out;
    const auto ks = p.intensities();
    for (int i = 0; i < kNumIntensities; ++i) {
        out.detect[i] = detection_rate(ks[i], ch) * (1.0 + ch.p_ap);
        out.error[i] = bit_error_prob(ks[i], ch);
    }
    return out;
}

std::uint64_t round_count(double x) {
    return static_cast<std::uint64_t>(std::llround(std::max(x, 0.0)));
}

// Smallest pulse count whose rounded X-basis detections cover the
// raw-key target.
std::uint64_t pulses_for_target(const ProtocolParams& p, const PulseProbs& probs) {
    const auto ps = p.intensity_probs();
    const double px2 = p.p_x * p.p_x;
    double rate = 0.0;
    for (int i = 0; i < kNumIntensities; ++i) {
        rate += ps[i] * px2 * probs.detect[i];
    }
    if (rate <= 0.0) {
        throw std::runtime_error("raw-key target unreachable: zero detection probability");
    }
    auto pulses = static_cast<std::uint64_t>(
        std::ceil(static_cast<double>(p.n_x_target) / rate));
    auto rounded_sum = [&](std::uint64_t n) {
        std::uint64_t s = 0;
        for (int i = 0; i < kNumIntensities; ++i) {
            s += round_count(static_cast<double>(n) * ps[i] * px2 * probs.detect[i]);
        }
        return s;
    };
    while (rounded_sum(pulses) < p.n_x_target) {
        ++pulses;
    }
    return pulses;
}

}  // namespace

double per_pulse_detection_prob(double intensity, const ChannelModel& ch) {
    return detection_rate(intensity, ch) * (1.0 + ch.p_ap);
}

ObservedStatistics expected_statistics(const ProtocolParams& p, const ChannelModel& ch) {
    const PulseProbs probs = pulse_probs(p, ch);
    const auto ps = p.intensity_probs();
    const double px2 = p.p_x * p.p_x;
    const double pz2 = (1.0 - p.p_x) * (1.0 - p.p_x);

    ObservedStatistics st;
    st.pulses = pulses_for_target(p, probs);
    const auto n = static_cast<double>(st.pulses);
    for (int i = 0; i < kNumIntensities; ++i) {
        st.n_x[i] = round_count(n * ps[i] * px2 * probs.detect[i]);
        st.n_z[i] = round_count(n * ps[i] * pz2 * probs.detect[i]);
        st.m_x[i] = std::min(round_count(n * ps[i] * px2 * probs.error[i]), st.n_x[i]);
        st.m_z[i] = std::min(round_count(n * ps[i] * pz2 * probs.error[i]), st.n_z[i]);
    }
    return st;
}

ObservedStatistics sample_statistics(const ProtocolParams& p, const ChannelModel& ch,
                                     std::uint64_t seed) {
    const PulseProbs probs = pulse_probs(p, ch);
    const auto ps = p.intensity_probs();
    const double px2 = p.p_x * p.p_x;
    const double pz2 = (1.0 - p.p_x) * (1.0 - p.p_x);

    ObservedStatistics st;
    st.pulses = pulses_for_target(p, probs);

    std::mt19937_64 rng(seed);
    auto draw = [&](double prob) -> std::uint64_t {
        if (prob <= 0.0) {
            return 0;
        }
        std::binomial_distribution<std::uint64_t> dist(st.pulses, prob);
        return dist(rng);
    };
    for (int i = 0; i < kNumIntensities; ++i) {
        st.n_x[i] = draw(ps[i] * px2 * probs.detect[i]);
        st.n_z[i] = draw(ps[i] * pz2 * probs.detect[i]);
        st.m_x[i] = std::min(draw(ps[i] * px2 * probs.error[i]), st.n_x[i]);
        st.m_z[i] = std::min(draw(ps[i] * pz2 * probs.error[i]), st.n_z[i]);
    }
    return st;
}

}  // namespace qkdmg::qkd
