#include "qkdmg/qkd/sweep.hpp"

#include <cstdint>
#include <stdexcept>

#include "qkdmg/qkd/finite_key.hpp"

namespace qkdmg::qkd {

namespace {

SweepPoint evaluate_point(const SweepGrid& grid, const ProtocolParams& protocol,
                          const ChannelModel& base, std::size_t flat_index) {
    const std::size_t n_eta = grid.eta_bob_values.size();
    const std::size_t n_emis = grid.e_mis_values.size();
    SweepPoint pt;
    pt.length_km = grid.lengths_km[flat_index / (n_emis * n_eta)];
    pt.e_mis = grid.e_mis_values[(flat_index / n_eta) % n_emis];
    pt.eta_bob = grid.eta_bob_values[flat_index % n_eta];

    ChannelModel ch = base;
    ch.length_km = pt.length_km;
    ch.e_mis = pt.e_mis;
    ch.eta_bob = pt.eta_bob;
    pt.result = key_generation_speed(protocol, ch);
    return pt;
}

}  // namespace

std::vector<SweepPoint> sweep_keyrate(const SweepGrid& grid, const ProtocolParams& protocol,
                                      const ChannelModel& base, SweepMode mode) {
    if (grid.size() == 0) {
        throw std::invalid_argument("sweep grid must be non-empty");
    }
    // Validate every grid point up front; the parallel loop must not throw.
    protocol.validate();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const std::size_t n_eta = grid.eta_bob_values.size();
        const std::size_t n_emis = grid.e_mis_values.size();
        ChannelModel ch = base;
        ch.length_km = grid.lengths_km[i / (n_emis * n_eta)];
        ch.e_mis = grid.e_mis_values[(i / n_eta) % n_emis];
        ch.eta_bob = grid.eta_bob_values[i % n_eta];
        ch.validate();
    }
    std::vector<SweepPoint> points(grid.size());

    if (mode == SweepMode::parallel) {
        const auto n = static_cast<std::int64_t>(points.size());
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) {
            points[static_cast<std::size_t>(i)] =
                evaluate_point(grid, protocol, base, static_cast<std::size_t>(i));
        }
    } else {
        for (std::size_t i = 0; i < points.size(); ++i) {
            points[i] = evaluate_point(grid, protocol, base, i);
        }
    }
    return points;
}

}  // namespace qkdmg::qkd
