#include "qkdmg/sim/presets.hpp"

#include "qkdmg/qkd/statistics.hpp"

namespace qkdmg::sim {

namespace {

double block_period(const ChannelSpec& spec) {
    const auto stats = qkd::expected_statistics(spec.protocol, spec.channel);
    return static_cast<double>(stats.pulses) / spec.channel.pulse_rate;
}

}  // namespace

SimConfig exhaustion_demo_config(double tx_rate) {
    SimConfig cfg;
    cfg.tx_rate = tx_rate;
    cfg.seed = 1;
    cfg.sample_interval_s = 5.0;
    cfg.record_packets = false;  // a full period carries ~10^5 packets

    ChannelSpec ch;
    ch.id = 1;
    ch.channel.length_km = 50.0;
    ch.initial_blocks = 1;
    cfg.channels.push_back(ch);

    cfg.duration_s = block_period(ch);
    return cfg;
}

SimConfig kps_demo_config(bool kps_enabled) {
    SimConfig cfg;
    cfg.tx_rate = 100.0;
    cfg.seed = 7;
    cfg.sample_interval_s = 0.5;
    cfg.duration_s = 700.0;  // two block periods of the 13.5 km channels
    cfg.record_packets = false;

    ChannelSpec strong_attack;
    strong_attack.id = 1;
    strong_attack.channel.length_km = 13.5;
    strong_attack.channel.e_mis = 8e-4;
    strong_attack.pool_threshold = 5'000;
    cfg.channels.push_back(strong_attack);

    ChannelSpec weak_attack = strong_attack;
    weak_attack.id = 2;
    weak_attack.channel.e_mis = 5e-4;
    cfg.channels.push_back(weak_attack);

    cfg.kps.enabled = kps_enabled;
    cfg.kps.policy.transfer_bits = 20'000;
    cfg.kps.policy.transfer_key_bits = 128;
    return cfg;
}

SimConfig attack_window_config(std::uint64_t seed, double tx_rate,
                               const std::vector<double>& forge_times) {
    SimConfig cfg;
    cfg.tx_rate = tx_rate;
    cfg.seed = seed;
    cfg.sample_interval_s = 1.0;
    cfg.duration_s = 24.0;
    cfg.record_packets = false;

    ChannelSpec ch;
    ch.id = 1;
    ch.protocol.n_x_target = 2'000'000;
    ch.channel.length_km = 5.0;
    ch.channel.pulse_rate = 2e7;  // ~11.3 s block period
    ch.pool_threshold = 0;
    cfg.channels.push_back(ch);

    for (double t : forge_times) {
        AttackSpec a;
        a.kind = AttackKind::forge;
        a.t = t;
        a.channel_id = 1;
        a.p_mw = -6.0;
        a.q_mvar = 0.0;
        cfg.attacks.push_back(a);
    }
    return cfg;
}

}  // namespace qkdmg::sim
