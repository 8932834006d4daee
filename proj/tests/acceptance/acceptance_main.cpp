// Integration gate: every scenario-level guarantee of the simulator,
// one pass/fail line each, with wall-clock budgets enforced.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qkdmg/link/frame.hpp"
#include "qkdmg/link/otp.hpp"
#include "qkdmg/link/transfer_cipher.hpp"
#include "qkdmg/qkd/finite_key.hpp"
#include "qkdmg/qkd/statistics.hpp"
#include "qkdmg/qkd/sweep.hpp"
#include "qkdmg/sim/config.hpp"
#include "qkdmg/sim/csv.hpp"
#include "qkdmg/sim/engine.hpp"
#include "qkdmg/sim/presets.hpp"
#include "reference_bound.hpp"

namespace {

namespace fs = std::filesystem;
using qkdmg::qkd::ChannelModel;
using qkdmg::qkd::ProtocolParams;

struct Failure {
    std::string detail;
};

using CheckFn = std::function<bool(std::string&)>;

bool approx_le(double a, double b, double tol = 1e-12) { return a <= b + tol; }

// --- 1. finite-key oracle equivalence -------------------------------

bool check_oracle_equivalence(std::string& detail) {
    const ProtocolParams protocol;
    const ChannelModel channel;  // 5 km reference configuration
    const auto stats = qkdmg::qkd::expected_statistics(protocol, channel);
    const auto lib = qkdmg::qkd::secret_key_length(stats, protocol);
    const auto ref = reference::secret_key_length(channel.length_km, channel.e_mis,
                                                  channel.eta_bob, protocol.n_x_target);
    const auto diff = lib.ell > ref.ell ? lib.ell - ref.ell : ref.ell - lib.ell;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "library ell=%llu, straight-line ell=%llu, |diff|=%llu",
                  static_cast<unsigned long long>(lib.ell),
                  static_cast<unsigned long long>(ref.ell),
                  static_cast<unsigned long long>(diff));
    detail = buf;
    return diff <= 1 && lib.pulses == ref.pulses;
}

// --- 2. fiber-length / noise monotonicity ---------------------------

bool check_length_noise_monotonicity(std::string& detail) {
    qkdmg::qkd::SweepGrid grid;
    grid.lengths_km = {1.0, 5.0, 10.0, 20.0, 40.0, 80.0};
    grid.e_mis_values = {5e-4, 6e-4, 7e-4, 8e-4, 9e-4};
    grid.eta_bob_values = {0.1};
    const auto points = qkdmg::qkd::sweep_keyrate(grid, ProtocolParams{}, ChannelModel{});

    const auto speed = [&](std::size_t li, std::size_t ei) {
        return points[li * 5 + ei].result.speed_bps;
    };
    for (std::size_t li = 0; li < 6; ++li) {
        for (std::size_t ei = 0; ei + 1 < 5; ++ei) {
            if (!approx_le(speed(li, ei + 1), speed(li, ei))) {
                detail = "speed increased along e_mis";
                return false;
            }
        }
    }
    for (std::size_t ei = 0; ei < 5; ++ei) {
        for (std::size_t li = 0; li + 1 < 6; ++li) {
            if (!approx_le(speed(li + 1, ei), speed(li, ei))) {
                detail = "speed increased along L";
                return false;
            }
        }
    }
    for (std::size_t li = 0; li < 4; ++li) {  // L <= 20 km
        for (std::size_t ei = 0; ei < 5; ++ei) {
            if (!(speed(li, ei) > 0.0)) {
                detail = "speed vanished at L <= 20 km";
                return false;
            }
        }
    }
    detail = "30-point grid non-increasing in L and e_mis, positive through 20 km";
    return true;
}

// --- 3. detector-efficiency monotonicity ----------------------------

bool check_efficiency_monotonicity(std::string& detail) {
    qkdmg::qkd::SweepGrid grid;
    grid.lengths_km = {5.0, 10.0, 20.0};
    grid.e_mis_values = {6e-4, 7e-4, 8e-4};
    grid.eta_bob_values = {0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50};
    const auto points = qkdmg::qkd::sweep_keyrate(grid, ProtocolParams{}, ChannelModel{});
    for (std::size_t row = 0; row < 9; ++row) {
        for (std::size_t j = 0; j + 1 < 9; ++j) {
            const auto& a = points[row * 9 + j].result;
            const auto& b = points[row * 9 + j + 1].result;
            if (!(b.speed_bps > a.speed_bps)) {
                detail = "speed not strictly increasing in eta_bob";
                return false;
            }
        }
    }
    detail = "strictly increasing in eta_bob on all nine (L, e_mis) rows";
    return true;
}

// --- 4. exhaustion reproduction -------------------------------------

bool check_exhaustion_reproduction(std::string& detail) {
    const ProtocolParams protocol;
    ChannelModel far_channel;
    far_channel.length_km = 50.0;
    const auto rate = qkdmg::qkd::key_generation_speed(protocol, far_channel);
    if (std::abs(rate.speed_bps - 1280.0) > 0.05 * 1280.0) {
        detail = "calibration off: speed(50 km) = " + std::to_string(rate.speed_bps);
        return false;
    }

    const auto quiet = qkdmg::sim::run_simulation(qkdmg::sim::exhaustion_demo_config(10.0));
    if (!quiet.exhaustions.empty()) {
        detail = "10 pkt/s exhausted the pool";
        return false;
    }
    const auto boundary = qkdmg::sim::run_simulation(qkdmg::sim::exhaustion_demo_config(20.0));
    if (!boundary.exhaustions.empty()) {
        detail = "20 pkt/s exhausted the pool";
        return false;
    }
    const auto starved = qkdmg::sim::run_simulation(qkdmg::sim::exhaustion_demo_config(40.0));
    if (starved.exhaustions.size() != 1) {
        detail = "40 pkt/s produced " + std::to_string(starved.exhaustions.size()) +
                 " exhaustion intervals";
        return false;
    }
    const auto& window = starved.exhaustions.front();
    const double fraction = (window.end - window.start) / starved.duration_s;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "speed(50km)=%.1f bit/s; 40 pkt/s exhausted %.1f%% of the block period",
                  rate.speed_bps, 100.0 * fraction);
    detail = buf;
    return fraction >= 0.25;
}

// --- 5. key pool sharing reproduction -------------------------------

bool check_kps_reproduction(std::string& detail) {
    const auto off = qkdmg::sim::run_simulation(qkdmg::sim::kps_demo_config(false));
    if (off.exhaustions_of(1).empty()) {
        detail = "without sharing, pool 1 never exhausted";
        return false;
    }
    if (!off.exhaustions_of(2).empty()) {
        detail = "without sharing, pool 2 exhausted";
        return false;
    }

    const auto on = qkdmg::sim::run_simulation(qkdmg::sim::kps_demo_config(true));
    if (!on.exhaustions_of(1).empty() || !on.exhaustions_of(2).empty()) {
        detail = "sharing did not keep both pools funded";
        return false;
    }
    if (on.transfers.empty()) {
        detail = "sharing produced no transfers";
        return false;
    }
    std::uint64_t donor_threshold = 0;
    for (const auto& ch : qkdmg::sim::kps_demo_config(true).channels) {
        if (ch.id == 2) {
            donor_threshold = ch.pool_threshold;
        }
    }
    std::uint64_t pool2_min = ~0ULL;
    for (const auto& s : on.pool_samples) {
        if (s.pool_id == 2) {
            pool2_min = std::min(pool2_min, s.level);
        }
    }
    for (const auto& tr : on.transfers) {
        if (tr.bits != 20'000 || tr.donor_id != 2 || tr.recipient_id != 1) {
            detail = "unexpected transfer shape";
            return false;
        }
        if (tr.donor_level_after <= donor_threshold) {
            detail = "donor breached its threshold";
            return false;
        }
        pool2_min = std::min(pool2_min, tr.donor_level_after);
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "off: pool1 %zu outage(s), pool2 none; on: none, %zu transfers of 20000, "
                  "donor min %llu",
                  off.exhaustions_of(1).size(), on.transfers.size(),
                  static_cast<unsigned long long>(pool2_min));
    detail = buf;
    return true;
}

// --- 6. attack-window property --------------------------------------

bool check_attack_window(std::string& detail) {
    std::mt19937_64 rng(20'240'817);
    int in_window = 0;
    int outside = 0;
    for (int schedule = 0; schedule < 100; ++schedule) {
        const double tx_rate = 420.0 + static_cast<double>(rng() % 101);
        std::set<double> times;
        while (times.size() < 3) {
            times.insert(0.5 + 0.1 * static_cast<double>(rng() % 231));
        }
        const std::vector<double> forge_times(times.begin(), times.end());
        const auto cfg = qkdmg::sim::attack_window_config(static_cast<std::uint64_t>(schedule),
                                                          tx_rate, forge_times);
        const auto trace = qkdmg::sim::run_simulation(cfg);

        const auto accepted_at = [&](double t) {
            for (const auto& rc : trace.reference_changes) {
                if (rc.attacker && std::abs(rc.t - t) < 1e-9) {
                    return true;
                }
            }
            return false;
        };
        for (double t : forge_times) {
            bool inside = false;
            bool guard = false;
            for (const auto& w : trace.exhaustions) {
                if (t >= w.start && t < w.end) {
                    inside = true;
                }
                if (t >= w.start - 1.0 / tx_rate - 1e-9 && t < w.start) {
                    guard = true;  // pool already below 64 bits, window not yet open
                }
            }
            if (inside) {
                ++in_window;
                if (!accepted_at(t)) {
                    detail = "forgery inside an exhaustion window was rejected";
                    return false;
                }
            } else if (!guard) {
                ++outside;
                if (accepted_at(t)) {
                    detail = "forgery with keys available was accepted";
                    return false;
                }
            }
        }
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%d in-window and %d keys-available injections, 0 violations",
                  in_window, outside);
    detail = buf;
    return in_window >= 20 && outside >= 150;
}

// --- 7. bit-accounting conservation ---------------------------------

bool check_conservation(std::string& detail) {
    qkdmg::sim::SimConfig cfg;
    cfg.duration_s = 2'510.0;
    cfg.tx_rate = 200.0;
    cfg.seed = 31;
    cfg.sample_interval_s = 10.0;
    cfg.record_packets = false;
    for (int id = 1; id <= 2; ++id) {
        qkdmg::sim::ChannelSpec ch;
        ch.id = id;
        ch.protocol.n_x_target = 2'000'000;
        ch.channel.length_km = 5.0;
        ch.channel.e_mis = id == 1 ? 8e-4 : 5e-4;
        ch.channel.pulse_rate = 2e7;
        ch.pool_threshold = 5'000;
        cfg.channels.push_back(ch);
    }
    cfg.kps.enabled = true;
    // Mid-run the first channel's noise floor jumps high enough to kill
    // its key yield entirely; sharing carries it from there.
    qkdmg::sim::AttackSpec noise;
    noise.kind = qkdmg::sim::AttackKind::noise;
    noise.t = 1'200.0;
    noise.channel_id = 1;
    noise.e_mis = 2e-3;
    cfg.attacks.push_back(noise);

    const auto trace = qkdmg::sim::run_simulation(cfg);
    std::uint64_t measurements = 0, deposited = 0, packet_bits = 0, cipher_bits = 0, level = 0;
    for (const auto& [id, tot] : trace.totals) {
        measurements += tot.measurements_sent;
        deposited += tot.qkd_deposited_bits;
        packet_bits += tot.packet_key_bits;
        cipher_bits += tot.transfer_key_bits;
        level += tot.final_level;
    }
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "%llu packets, deposited %llu = level %llu + packet %llu + cipher %llu (%zu "
                  "transfers)",
                  static_cast<unsigned long long>(measurements),
                  static_cast<unsigned long long>(deposited),
                  static_cast<unsigned long long>(level),
                  static_cast<unsigned long long>(packet_bits),
                  static_cast<unsigned long long>(cipher_bits), trace.transfers.size());
    detail = buf;
    if (measurements < 1'000'000) {
        detail += " (too few packets)";
        return false;
    }
    if (trace.transfers.empty()) {
        detail += " (no transfers exercised)";
        return false;
    }
    return deposited == level + packet_bits + cipher_bits;
}

// --- 8. crypto round-trips -------------------------------------------

bool check_crypto_roundtrips(std::string& detail) {
    std::mt19937_64 rng(4096);
    for (int i = 0; i < 10'000; ++i) {
        qkdmg::link::Frame f;
        f.seq = static_cast<std::uint32_t>(i + 1);
        f.src = 0;
        f.dst = 1;
        f.mode = qkdmg::link::CipherMode::otp;
        const std::uint64_t payload = rng();
        const std::uint64_t key = rng();
        f.payload = qkdmg::link::otp_encrypt(payload, key);
        const auto decoded = qkdmg::link::frame_decode(qkdmg::link::frame_encode(f));
        if (qkdmg::link::otp_decrypt(decoded.payload, key) != payload) {
            detail = "otp frame round-trip failed";
            return false;
        }
    }
    for (int i = 0; i < 1'000; ++i) {
        std::vector<std::uint8_t> payload(2'500);
        for (auto& b : payload) {
            b = static_cast<std::uint8_t>(rng());
        }
        std::vector<std::uint8_t> key(16), wrong(16);
        for (auto& b : key) {
            b = static_cast<std::uint8_t>(rng());
        }
        do {
            for (auto& b : wrong) {
                b = static_cast<std::uint8_t>(rng());
            }
        } while (wrong == key);
        const auto ct = qkdmg::link::block_encrypt_transfer(payload, key);
        const auto pt = qkdmg::link::block_decrypt_transfer(ct, key);
        if (!pt || *pt != payload) {
            detail = "transfer cipher round-trip failed";
            return false;
        }
        if (qkdmg::link::block_decrypt_transfer(ct, wrong)) {
            detail = "wrong-key decryption authenticated";
            return false;
        }
    }
    detail = "10000 OTP frames and 1000 authenticated transfers, all wrong keys rejected";
    return true;
}

// --- 9. replay determinism -------------------------------------------

bool check_determinism(std::string& detail) {
    const auto dir = fs::temp_directory_path() / "qkdmg_acceptance";
    fs::create_directories(dir);
    const auto config_path = (dir / "scenario.cfg").string();
    {
        std::ofstream out(config_path, std::ios::binary);
        out << qkdmg::sim::render_config(qkdmg::sim::kps_demo_config(true));
    }

    const auto read_file = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    const char* names[3] = {"pools.csv", "packets.csv", "events.csv"};
    std::string first[3];
    for (int run = 0; run < 2; ++run) {
        const auto cfg = qkdmg::sim::parse_config_file(config_path);
        const auto trace = qkdmg::sim::run_simulation(cfg);
        const auto out_dir = dir / ("run" + std::to_string(run));
        fs::create_directories(out_dir);
        qkdmg::sim::emit_csv(trace, qkdmg::sim::TraceTable::pools, (out_dir / names[0]).string());
        qkdmg::sim::emit_csv(trace, qkdmg::sim::TraceTable::packets,
                             (out_dir / names[1]).string());
        qkdmg::sim::emit_csv(trace, qkdmg::sim::TraceTable::events, (out_dir / names[2]).string());
        for (int i = 0; i < 3; ++i) {
            const auto contents = read_file(out_dir / names[i]);
            if (run == 0) {
                first[i] = contents;
            } else if (first[i] != contents) {
                detail = std::string("byte mismatch in ") + names[i];
                return false;
            }
        }
    }
    detail = "two runs, three tables each, byte-identical";
    return true;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double limit_s;
        CheckFn fn;
    };
    const std::vector<Criterion> criteria = {
        {1, "finite-key bound matches the straight-line oracle within 1 bit", 1.0,
         check_oracle_equivalence},
        {2, "key speed non-increasing in L and e_mis, positive through 20 km", 10.0,
         check_length_noise_monotonicity},
        {3, "key speed strictly increasing in detector efficiency", 10.0,
         check_efficiency_monotonicity},
        {4, "calibrated 50 km channel: 10/20 pkt/s hold, 40 pkt/s starves >= 25%", 5.0,
         check_exhaustion_reproduction},
        {5, "pool sharing removes outages without breaching the donor", 10.0,
         check_kps_reproduction},
        {6, "forged references land only inside exhaustion windows", 10.0, check_attack_window},
        {7, "bit accounting conserves over a million-packet run", 30.0, check_conservation},
        {8, "crypto round-trips and wrong-key rejection", 5.0, check_crypto_roundtrips},
        {9, "simulate twice, byte-identical CSVs", 60.0, check_determinism},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = c.fn(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (elapsed > c.limit_s) {
            ok = false;
            detail += " [exceeded " + std::to_string(c.limit_s) + " s budget]";
        }
        std::printf("[%s] %d. %s (%.2f s)%s%s\n", ok ? "PASS" : "FAIL", c.id, c.name, elapsed,
                    detail.empty() ? "" : " -- ", detail.c_str());
        if (!ok) {
            ++failures;
        }
    }
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
    }
    return failures == 0 ? 0 : 1;
}
