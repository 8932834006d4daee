#pragma once

#include <array>
#include <cstdint>

namespace qkdmg::qkd {

inline constexpr int kNumIntensities = 3;

// Protocol-side constants: the three pulse intensities (signal, decoy,
// vacuum), their selection probabilities, the basis probability, the
// raw-key target, and the post-processing failure budgets.
struct ProtocolParams {
    double k1 = 0.4;
    double k2 = 0.1;
    double k3 = 0.007;
    double p_k1 = 1.0 / 3.0;
    double p_k2 = 1.0 / 3.0;
    double p_k3 = 1.0 / 3.0;
    double p_x = 0.8;
    std::uint64_t n_x_target = 10'000'000;
    double eta_ec = 1.16;   // error-correction efficiency, >= 1
    double eps_c = 1e-11;   // correctness failure probability
    double eps_s = 1e-11;   // secrecy failure probability

    std::array<double, kNumIntensities> intensities() const { return {k1, k2, k3}; }
    std::array<double, kNumIntensities> intensity_probs() const { return {p_k1, p_k2, p_k3}; }

    // Throws std::invalid_argument when the decoy ordering (k1 > k2 + k3,
    // k2 > k3 >= 0) or any probability constraint is violated.
    void validate() const;
};

// Physical-side constants of one fiber link plus the source repetition
// rate. The default pulse rate is calibrated so the 50 km reference
// channel generates roughly 1.28 kbit/s of secret key.
struct ChannelModel {
    double length_km = 5.0;
    double e_mis = 5e-4;       // optical misalignment / attack error rate
    double p_dc = 6e-7;        // dark count probability per pulse
    double p_ap = 4e-2;        // after-pulse probability
    double eta_bob = 0.1;      // receiver detection efficiency
    double pulse_rate = 4.84e6;  // pulses per second

    void validate() const;
};

// Per-intensity detection and error counts for both bases, plus the
// number of pulses that produced them. Index order follows
// ProtocolParams::intensities().
struct ObservedStatistics {
    std::array<std::uint64_t, kNumIntensities> n_x{};
    std::array<std::uint64_t, kNumIntensities> n_z{};
    std::array<std::uint64_t, kNumIntensities> m_x{};
    std::array<std::uint64_t, kNumIntensities> m_z{};
    std::uint64_t pulses = 0;

    std::uint64_t total_n_x() const { return n_x[0] + n_x[1] + n_x[2]; }
    std::uint64_t total_n_z() const { return n_z[0] + n_z[1] + n_z[2]; }
    std::uint64_t total_m_x() const { return m_x[0] + m_x[1] + m_x[2]; }
    std::uint64_t total_m_z() const { return m_z[0] + m_z[1] + m_z[2]; }

    // Throws std::invalid_argument if any error count exceeds its
    // detection count or the pulse budget is exceeded.
    void validate() const;
};

// Secret-key-length evaluation output with the intermediate bounds kept
// for diagnostics and CSV export.
struct KeyRateResult {
    std::uint64_t ell = 0;        // secret key length, bits
    std::uint64_t pulses = 0;     // pulses consumed to reach the raw-key target
    double speed_bps = 0.0;       // ell * pulse_rate / pulses (0 when rate unknown)
    double xi_x0 = 0.0;           // vacuum events, X basis
    double xi_x1 = 0.0;           // single-photon events, X basis
    double xi_z0 = 0.0;
    double xi_z1 = 0.0;
    double delta_z1 = 0.0;        // single-photon bit errors, Z basis
    double phi_x = 0.0;           // phase error rate, clamped to [0, 0.5]
    double lambda_ec = 0.0;       // error-correction leakage
    bool insufficient_stats = false;
};

enum class Basis { x, z };
enum class CountKind { detections, errors };

}  // namespace qkdmg::qkd
