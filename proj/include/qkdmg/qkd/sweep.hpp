#pragma once

#include <vector>

#include "qkdmg/qkd/types.hpp"

namespace qkdmg::qkd {

struct SweepGrid {
    std::vector<double> lengths_km;
    std::vector<double> e_mis_values;
    std::vector<double> eta_bob_values;

    std::size_t size() const {
        return lengths_km.size() * e_mis_values.size() * eta_bob_values.size();
    }
};

struct SweepPoint {
    double length_km = 0.0;
    double e_mis = 0.0;
    double eta_bob = 0.0;
    KeyRateResult result;
};

enum class SweepMode {
    serial,    // reference implementation, one point at a time
    parallel,  // OpenMP over grid points (serial when built without OpenMP)
};

// Evaluates key_generation_speed over the Cartesian grid. Rows are
// ordered lexicographically by (L, e_mis, eta_bob) regardless of the
// execution mode, and both modes produce bit-identical results since
// every grid point is an independent pure evaluation.
std::vector<SweepPoint> sweep_keyrate(const SweepGrid& grid, const ProtocolParams& protocol,
                                      const ChannelModel& base,
                                      SweepMode mode = SweepMode::parallel);

}  // namespace qkdmg::qkd
