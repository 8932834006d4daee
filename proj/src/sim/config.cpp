#include "qkdmg/sim/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace qkdmg::sim {

void SimConfig::validate() const {
    if (!(duration_s > 0.0)) {
        throw ConfigError("duration must be positive");
    }
    if (!(tx_rate > 0.0)) {
        throw ConfigError("tx_rate must be positive");
    }
    if (!(sample_interval_s > 0.0)) {
        throw ConfigError("sample_interval must be positive");
    }
    if (transport_latency_s < 0.0) {
        throw ConfigError("transport_latency must be non-negative");
    }
    if (channels.empty()) {
        throw ConfigError("at least one channel is required");
    }
    std::set<int> ids;
    for (const auto& ch : channels) {
        if (ch.id < 1 || ch.id > 100) {
            throw ConfigError("channel id must be in [1, 100]");
        }
        if (!ids.insert(ch.id).second) {
            throw ConfigError("duplicate channel id " + std::to_string(ch.id));
        }
        try {
            ch.protocol.validate();
            ch.channel.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError("channel " + std::to_string(ch.id) + ": " + e.what());
        }
    }
    if (kps.enabled) {
        try {
            kps.policy.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("kps: ") + e.what());
        }
        if (kps.policy.transfer_key_bits < 128) {
            throw ConfigError("kps: the transfer key must cover the 128-bit cipher key");
        }
    }
    for (const auto& a : attacks) {
        if (a.t < 0.0 || a.t > duration_s) {
            throw ConfigError("attack time outside [0, duration]");
        }
        if (!ids.contains(a.channel_id)) {
            throw ConfigError("attack targets unknown channel " + std::to_string(a.channel_id));
        }
        if (a.kind == AttackKind::noise && !(a.e_mis >= 0.0 && a.e_mis <= 1.0)) {
            throw ConfigError("noise attack e_mis outside [0,1]");
        }
    }
}

SimConfig inject_attack(SimConfig cfg, const AttackSpec& attack) {
    if (attack.t < 0.0 || attack.t > cfg.duration_s) {
        throw ConfigError("attack time outside [0, duration]");
    }
    cfg.attacks.push_back(attack);
    return cfg;
}

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) {
        return {};
    }
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double to_double(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) {
            throw std::invalid_argument(v);
        }
        return d;
    } catch (const std::exception&) {
        throw ConfigError("invalid number for '" + key + "': " + v);
    }
}

std::uint64_t to_u64(const std::string& v, const std::string& key) {
    const double d = to_double(v, key);
    if (d < 0.0) {
        throw ConfigError("'" + key + "' must be non-negative");
    }
    return static_cast<std::uint64_t>(d);
}

bool to_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "on" || v == "1" || v == "yes") {
        return true;
    }
    if (v == "false" || v == "off" || v == "0" || v == "no") {
        return false;
    }
    throw ConfigError("invalid boolean for '" + key + "': " + v);
}

struct Section {
    std::string name;  // empty = top level
    AttackSpec attack;
    ChannelSpec channel;
    ReferencePoint reference;
    LoadPoint load;
    bool attack_kind_set = false;
};

void apply_top_level(SimConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "duration") {
        cfg.duration_s = to_double(value, key);
    } else if (key == "tx_rate") {
        cfg.tx_rate = to_double(value, key);
    } else if (key == "seed") {
        cfg.seed = to_u64(value, key);
    } else if (key == "sample_interval") {
        cfg.sample_interval_s = to_double(value, key);
    } else if (key == "transport_latency") {
        cfg.transport_latency_s = to_double(value, key);
    } else if (key == "encrypt_measurements") {
        cfg.encrypt_measurements = to_bool(value, key);
    } else if (key == "authenticate_frames") {
        cfg.authenticate_frames = to_bool(value, key);
    } else if (key == "record_packets") {
        cfg.record_packets = to_bool(value, key);
    } else if (key == "kps_enabled") {
        cfg.kps.enabled = to_bool(value, key);
    } else if (key == "kps_transfer_size") {
        cfg.kps.policy.transfer_bits = to_u64(value, key);
    } else if (key == "kps_transfer_key_bits") {
        cfg.kps.policy.transfer_key_bits = to_u64(value, key);
    } else {
        throw ConfigError("unknown key '" + key + "'");
    }
}

void apply_channel(ChannelSpec& ch, const std::string& key, const std::string& value) {
    auto& pr = ch.protocol;
    auto& cm = ch.channel;
    if (key == "id") {
        ch.id = static_cast<int>(to_u64(value, key));
    } else if (key == "L") {
        cm.length_km = to_double(value, key);
    } else if (key == "e_mis") {
        cm.e_mis = to_double(value, key);
    } else if (key == "p_dc") {
        cm.p_dc = to_double(value, key);
    } else if (key == "p_ap") {
        cm.p_ap = to_double(value, key);
    } else if (key == "eta_bob") {
        cm.eta_bob = to_double(value, key);
    } else if (key == "pulse_rate") {
        cm.pulse_rate = to_double(value, key);
    } else if (key == "k1") {
        pr.k1 = to_double(value, key);
    } else if (key == "k2") {
        pr.k2 = to_double(value, key);
    } else if (key == "k3") {
        pr.k3 = to_double(value, key);
    } else if (key == "p_k1") {
        pr.p_k1 = to_double(value, key);
    } else if (key == "p_k2") {
        pr.p_k2 = to_double(value, key);
    } else if (key == "p_k3") {
        pr.p_k3 = to_double(value, key);
    } else if (key == "p_x") {
        pr.p_x = to_double(value, key);
    } else if (key == "n_x") {
        pr.n_x_target = to_u64(value, key);
    } else if (key == "eta_ec") {
        pr.eta_ec = to_double(value, key);
    } else if (key == "eps_c") {
        pr.eps_c = to_double(value, key);
    } else if (key == "eps_s") {
        pr.eps_s = to_double(value, key);
    } else if (key == "pool_threshold") {
        ch.pool_threshold = to_u64(value, key);
    } else if (key == "initial_blocks") {
        ch.initial_blocks = to_u64(value, key);
    } else if (key == "pool_capacity") {
        ch.pool_capacity = to_u64(value, key);
    } else {
        throw ConfigError("unknown channel key '" + key + "'");
    }
}

void apply_attack(Section& sec, const std::string& key, const std::string& value) {
    auto& a = sec.attack;
    if (key == "kind") {
        if (value == "noise") {
            a.kind = AttackKind::noise;
        } else if (value == "forge") {
            a.kind = AttackKind::forge;
        } else {
            throw ConfigError("unknown attack kind '" + value + "'");
        }
        sec.attack_kind_set = true;
    } else if (key == "t") {
        a.t = to_double(value, key);
    } else if (key == "channel") {
        a.channel_id = static_cast<int>(to_u64(value, key));
    } else if (key == "e_mis") {
        a.e_mis = to_double(value, key);
    } else if (key == "p_mw") {
        a.p_mw = to_double(value, key);
    } else if (key == "q_mvar") {
        a.q_mvar = to_double(value, key);
    } else {
        throw ConfigError("unknown attack key '" + key + "'");
    }
}

void flush_section(SimConfig& cfg, Section& sec) {
    if (sec.name == "channel") {
        cfg.channels.push_back(sec.channel);
    } else if (sec.name == "attack") {
        if (!sec.attack_kind_set) {
            throw ConfigError("[attack] section requires a 'kind'");
        }
        cfg.attacks.push_back(sec.attack);
    } else if (sec.name == "reference") {
        cfg.references.push_back(sec.reference);
    } else if (sec.name == "load") {
        cfg.loads.push_back(sec.load);
    }
    sec = Section{};
}

}  // namespace

SimConfig parse_config(std::istream& in) {
    SimConfig cfg;
    cfg.channels.clear();
    Section sec;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        try {
            if (line.front() == '[') {
                if (line.back() != ']') {
                    throw ConfigError("unterminated section header");
                }
                flush_section(cfg, sec);
                sec.name = trim(line.substr(1, line.size() - 2));
                if (sec.name != "channel" && sec.name != "attack" && sec.name != "reference" &&
                    sec.name != "load") {
                    throw ConfigError("unknown section [" + sec.name + "]");
                }
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                throw ConfigError("expected 'key = value'");
            }
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty() || value.empty()) {
                throw ConfigError("expected 'key = value'");
            }
            if (sec.name.empty()) {
                apply_top_level(cfg, key, value);
            } else if (sec.name == "channel") {
                apply_channel(sec.channel, key, value);
            } else if (sec.name == "attack") {
                apply_attack(sec, key, value);
            } else if (sec.name == "reference") {
                if (key == "t") {
                    sec.reference.t = to_double(value, key);
                } else if (key == "p_mw") {
                    sec.reference.p_mw = to_double(value, key);
                } else if (key == "q_mvar") {
                    sec.reference.q_mvar = to_double(value, key);
                } else {
                    throw ConfigError("unknown reference key '" + key + "'");
                }
            } else if (sec.name == "load") {
                if (key == "t") {
                    sec.load.t = to_double(value, key);
                } else if (key == "mw") {
                    sec.load.mw = to_double(value, key);
                } else {
                    throw ConfigError("unknown load key '" + key + "'");
                }
            }
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    flush_section(cfg, sec);
    if (cfg.channels.empty()) {
        ChannelSpec def;
        cfg.channels.push_back(def);  // bare configs fall back to the reference channel
    }
    cfg.validate();
    return cfg;
}

SimConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config file: " + path);
    }
    return parse_config(in);
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace

std::string render_config(const SimConfig& cfg) {
    std::ostringstream out;
    out << "duration = " << fmt(cfg.duration_s) << "\n";
    out << "tx_rate = " << fmt(cfg.tx_rate) << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "sample_interval = " << fmt(cfg.sample_interval_s) << "\n";
    out << "transport_latency = " << fmt(cfg.transport_latency_s) << "\n";
    out << "encrypt_measurements = " << (cfg.encrypt_measurements ? "true" : "false") << "\n";
    out << "authenticate_frames = " << (cfg.authenticate_frames ? "true" : "false") << "\n";
    out << "record_packets = " << (cfg.record_packets ? "true" : "false") << "\n";
    out << "kps_enabled = " << (cfg.kps.enabled ? "true" : "false") << "\n";
    out << "kps_transfer_size = " << cfg.kps.policy.transfer_bits << "\n";
    out << "kps_transfer_key_bits = " << cfg.kps.policy.transfer_key_bits << "\n";
    for (const auto& ch : cfg.channels) {
        out << "\n[channel]\n";
        out << "id = " << ch.id << "\n";
        out << "L = " << fmt(ch.channel.length_km) << "\n";
        out << "e_mis = " << fmt(ch.channel.e_mis) << "\n";
        out << "p_dc = " << fmt(ch.channel.p_dc) << "\n";
        out << "p_ap = " << fmt(ch.channel.p_ap) << "\n";
        out << "eta_bob = " << fmt(ch.channel.eta_bob) << "\n";
        out << "pulse_rate = " << fmt(ch.channel.pulse_rate) << "\n";
        out << "k1 = " << fmt(ch.protocol.k1) << "\n";
        out << "k2 = " << fmt(ch.protocol.k2) << "\n";
        out << "k3 = " << fmt(ch.protocol.k3) << "\n";
        out << "p_k1 = " << fmt(ch.protocol.p_k1) << "\n";
        out << "p_k2 = " << fmt(ch.protocol.p_k2) << "\n";
        out << "p_k3 = " << fmt(ch.protocol.p_k3) << "\n";
        out << "p_x = " << fmt(ch.protocol.p_x) << "\n";
        out << "n_x = " << ch.protocol.n_x_target << "\n";
        out << "eta_ec = " << fmt(ch.protocol.eta_ec) << "\n";
        out << "eps_c = " << fmt(ch.protocol.eps_c) << "\n";
        out << "eps_s = " << fmt(ch.protocol.eps_s) << "\n";
        out << "pool_threshold = " << ch.pool_threshold << "\n";
        out << "initial_blocks = " << ch.initial_blocks << "\n";
        if (ch.pool_capacity) {
            out << "pool_capacity = " << *ch.pool_capacity << "\n";
        }
    }
    for (const auto& a : cfg.attacks) {
        out << "\n[attack]\n";
        out << "kind = " << (a.kind == AttackKind::noise ? "noise" : "forge") << "\n";
        out << "t = " << fmt(a.t) << "\n";
        out << "channel = " << a.channel_id << "\n";
        if (a.kind == AttackKind::noise) {
            out << "e_mis = " << fmt(a.e_mis) << "\n";
        } else {
            out << "p_mw = " << fmt(a.p_mw) << "\n";
            out << "q_mvar = " << fmt(a.q_mvar) << "\n";
        }
    }
    for (const auto& r : cfg.references) {
        out << "\n[reference]\n";
        out << "t = " << fmt(r.t) << "\n";
        out << "p_mw = " << fmt(r.p_mw) << "\n";
        out << "q_mvar = " << fmt(r.q_mvar) << "\n";
    }
    for (const auto& l : cfg.loads) {
        out << "\n[load]\n";
        out << "t = " << fmt(l.t) << "\n";
        out << "mw = " << fmt(l.mw) << "\n";
    }
    return out.str();
}

}  // namespace qkdmg::sim
