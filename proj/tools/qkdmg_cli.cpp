// Command-line front end: single key-rate evaluations, parameter
// sweeps, scenario simulation, and the built-in two-pool sharing demo.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "qkdmg/qkd/finite_key.hpp"
#include "qkdmg/qkd/sweep.hpp"
#include "qkdmg/sim/csv.hpp"
#include "qkdmg/sim/engine.hpp"
#include "qkdmg/sim/presets.hpp"

namespace {

namespace fs = std::filesystem;
using qkdmg::sim::ConfigError;
using qkdmg::sim::IoError;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;

struct ChannelOverrides {
    std::optional<double> length_km, e_mis, eta_bob, pulse_rate, p_dc, p_ap;
    std::optional<std::uint64_t> n_x;

    void apply(qkdmg::sim::ChannelSpec& spec) const {
        if (length_km) spec.channel.length_km = *length_km;
        if (e_mis) spec.channel.e_mis = *e_mis;
        if (eta_bob) spec.channel.eta_bob = *eta_bob;
        if (pulse_rate) spec.channel.pulse_rate = *pulse_rate;
        if (p_dc) spec.channel.p_dc = *p_dc;
        if (p_ap) spec.channel.p_ap = *p_ap;
        if (n_x) spec.protocol.n_x_target = *n_x;
    }
};

void add_channel_options(CLI::App* cmd, ChannelOverrides& ov) {
    cmd->add_option("--L", ov.length_km, "Fiber length in km");
    cmd->add_option("--e-mis", ov.e_mis, "Misalignment/attack error rate");
    cmd->add_option("--eta-bob", ov.eta_bob, "Receiver detection efficiency");
    cmd->add_option("--pulse-rate", ov.pulse_rate, "Source repetition rate in Hz");
    cmd->add_option("--p-dc", ov.p_dc, "Dark count probability per pulse");
    cmd->add_option("--p-ap", ov.p_ap, "After-pulse probability");
    cmd->add_option("--n-x", ov.n_x, "Raw key target in bits");
}

qkdmg::sim::ChannelSpec base_channel(const std::string& config_path) {
    if (config_path.empty()) {
        return {};
    }
    const auto cfg = qkdmg::sim::parse_config_file(config_path);
    return cfg.channels.front();
}

int run_keyrate(const std::string& config_path, const ChannelOverrides& ov) {
    auto spec = base_channel(config_path);
    ov.apply(spec);
    const auto res = qkdmg::qkd::key_generation_speed(spec.protocol, spec.channel);
    std::printf("ell_bits        %llu\n", static_cast<unsigned long long>(res.ell));
    std::printf("pulses          %llu\n", static_cast<unsigned long long>(res.pulses));
    std::printf("block_period_s  %.3f\n",
                static_cast<double>(res.pulses) / spec.channel.pulse_rate);
    std::printf("speed_bits_s    %.3f\n", res.speed_bps);
    std::printf("phi_x           %.6g\n", res.phi_x);
    std::printf("xi_x0           %.6g\n", res.xi_x0);
    std::printf("xi_x1           %.6g\n", res.xi_x1);
    std::printf("xi_z0           %.6g\n", res.xi_z0);
    std::printf("xi_z1           %.6g\n", res.xi_z1);
    std::printf("delta_z1        %.6g\n", res.delta_z1);
    std::printf("lambda_ec       %.6g\n", res.lambda_ec);
    std::printf("insufficient    %s\n", res.insufficient_stats ? "yes" : "no");
    return kExitOk;
}

int run_sweep(const std::string& config_path, const ChannelOverrides& ov,
              std::vector<double> lengths, std::vector<double> e_mis_values,
              std::vector<double> eta_values, const std::string& out_path, bool serial) {
    auto spec = base_channel(config_path);
    ov.apply(spec);
    qkdmg::qkd::SweepGrid grid;
    grid.lengths_km = lengths.empty() ? std::vector<double>{spec.channel.length_km} : lengths;
    grid.e_mis_values =
        e_mis_values.empty() ? std::vector<double>{spec.channel.e_mis} : e_mis_values;
    grid.eta_bob_values =
        eta_values.empty() ? std::vector<double>{spec.channel.eta_bob} : eta_values;

    const auto points = qkdmg::qkd::sweep_keyrate(
        grid, spec.protocol, spec.channel,
        serial ? qkdmg::qkd::SweepMode::serial : qkdmg::qkd::SweepMode::parallel);
    if (out_path.empty() || out_path == "-") {
        qkdmg::sim::emit_sweep_csv(points, std::cout);
        return kExitOk;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        throw IoError("cannot create " + out_path);
    }
    qkdmg::sim::emit_sweep_csv(points, out);
    if (!out.flush()) {
        throw IoError("write failed: " + out_path);
    }
    return kExitOk;
}

int write_trace(const qkdmg::sim::Trace& trace, const std::string& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        throw IoError("cannot create directory " + out_dir);
    }
    using qkdmg::sim::TraceTable;
    qkdmg::sim::emit_csv(trace, TraceTable::pools, out_dir + "/pools.csv");
    qkdmg::sim::emit_csv(trace, TraceTable::packets, out_dir + "/packets.csv");
    qkdmg::sim::emit_csv(trace, TraceTable::events, out_dir + "/events.csv");
    std::printf("wrote %s/{pools,packets,events}.csv\n", out_dir.c_str());
    return kExitOk;
}

int run_simulate(const std::string& config_path, const std::string& out_dir) {
    const auto cfg = qkdmg::sim::parse_config_file(config_path);
    const auto trace = qkdmg::sim::run_simulation(cfg);
    return write_trace(trace, out_dir);
}

int run_kps_demo(bool kps_on, const std::string& out_dir, bool emit_config) {
    const auto cfg = qkdmg::sim::kps_demo_config(kps_on);
    if (emit_config) {
        std::cout << qkdmg::sim::render_config(cfg);
        return kExitOk;
    }
    const auto trace = qkdmg::sim::run_simulation(cfg);
    for (const auto& [id, tot] : trace.totals) {
        std::printf("pool %d: deposited=%llu transfers_in=%llu shortages=%llu final=%llu\n", id,
                    static_cast<unsigned long long>(tot.qkd_deposited_bits),
                    static_cast<unsigned long long>(tot.transfer_in_bits),
                    static_cast<unsigned long long>(tot.shortages),
                    static_cast<unsigned long long>(tot.final_level));
    }
    return write_trace(trace, out_dir);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decoy-state QKD microgrid link simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string out_dir = "out";
    bool serial = false;
    bool kps_off = false;
    bool emit_config = false;
    ChannelOverrides ov;
    std::vector<double> lengths, e_mis_values, eta_values;

    auto* keyrate = app.add_subcommand("keyrate", "Evaluate one channel's secret key rate");
    keyrate->add_option("--config", config_path, "Scenario file supplying the base channel");
    add_channel_options(keyrate, ov);

    auto* sweep = app.add_subcommand("sweep", "Key-rate sweep over a parameter grid");
    sweep->add_option("--config", config_path, "Scenario file supplying the base channel");
    sweep->add_option("--L-list", lengths, "Fiber lengths in km")->delimiter(',');
    sweep->add_option("--e-mis-list", e_mis_values, "Misalignment rates")->delimiter(',');
    sweep->add_option("--eta-bob-list", eta_values, "Detection efficiencies")->delimiter(',');
    sweep->add_option("--out", out_path, "Output CSV path ('-' for stdout)");
    sweep->add_flag("--serial", serial, "Use the serial reference kernel");
    add_channel_options(sweep, ov);

    auto* simulate = app.add_subcommand("simulate", "Run a scenario and export trace CSVs");
    simulate->add_option("--config", config_path, "Scenario file")->required();
    simulate->add_option("--out-dir", out_dir, "Output directory");

    auto* kps = app.add_subcommand("kps-demo", "Two-pool key sharing scenario");
    kps->add_flag("--no-kps", kps_off, "Disable sharing (baseline run)");
    kps->add_option("--out-dir", out_dir, "Output directory");
    kps->add_flag("--emit-config", emit_config, "Print the scenario file and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (keyrate->parsed()) {
            return run_keyrate(config_path, ov);
        }
        if (sweep->parsed()) {
            return run_sweep(config_path, ov, lengths, e_mis_values, eta_values, out_path,
                             serial);
        }
        if (simulate->parsed()) {
            return run_simulate(config_path, out_dir);
        }
        if (kps->parsed()) {
            return run_kps_demo(!kps_off, out_dir, emit_config);
        }
    } catch (const IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kExitIo;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
    return kExitOk;
}
