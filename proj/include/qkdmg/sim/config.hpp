#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qkdmg/pool/kps.hpp"
#include "qkdmg/qkd/types.hpp"

namespace qkdmg::sim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class AttackKind { noise, forge };

struct AttackSpec {
    AttackKind kind = AttackKind::noise;
    double t = 0.0;
    int channel_id = 1;
    double e_mis = 0.0;   // noise: misalignment rate from t onward
    double p_mw = 0.0;    // forge: injected reference
    double q_mvar = 0.0;
};

// Scheduled control decision: the reference the control center sends
// from time t onward.
struct ReferencePoint {
    double t = 0.0;
    double p_mw = 0.0;
    double q_mvar = 0.0;
};

// Scheduled measurement contents (load seen by the telemetry source).
struct LoadPoint {
    double t = 0.0;
    double mw = 0.0;
};

struct ChannelSpec {
    int id = 1;
    qkd::ProtocolParams protocol;
    qkd::ChannelModel channel;
    std::uint64_t pool_threshold = 5'000;
    std::uint64_t initial_blocks = 1;  // key blocks banked before t = 0
    std::optional<std::uint64_t> pool_capacity;
};

struct KpsSpec {
    bool enabled = false;
    pool::KpsPolicy policy;
};

struct SimConfig {
    double duration_s = 60.0;
    double tx_rate = 100.0;  // packet cycles per second, per channel
    std::uint64_t seed = 1;
    double sample_interval_s = 1.0;
    double transport_latency_s = 0.0;
    bool encrypt_measurements = false;
    bool authenticate_frames = false;  // 64-bit one-time tag on control frames
    bool record_packets = true;
    std::vector<ChannelSpec> channels;
    KpsSpec kps;
    std::vector<AttackSpec> attacks;
    std::vector<ReferencePoint> references;
    std::vector<LoadPoint> loads;

    // Throws ConfigError on any violated constraint.
    void validate() const;
};

// Appends an attack after validating its time against the duration.
SimConfig inject_attack(SimConfig cfg, const AttackSpec& attack);

// Key-value scenario format: top-level `key = value` lines plus
// repeatable [channel], [attack], [reference] and [load] sections.
// Unspecified channel parameters keep the library defaults.
SimConfig parse_config(std::istream& in);
SimConfig parse_config_file(const std::string& path);  // IoError when unreadable
std::string render_config(const SimConfig& cfg);

}  // namespace qkdmg::sim
