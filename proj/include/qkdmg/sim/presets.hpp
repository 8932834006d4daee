#pragma once

#include <vector>

#include "qkdmg/sim/config.hpp"

namespace qkdmg::sim {

// Single 50 km channel driven for exactly one key-block period at the
// given packet rate, starting from one banked block. Rates up to
// 20 pkt/s stay funded; faster ones exhaust the pool mid-period.
SimConfig exhaustion_demo_config(double tx_rate);

// Two-channel sharing scenario: identical 13.5 km links except for the
// misalignment rate (8e-4 on channel 1 simulating a strong attack,
// 5e-4 on channel 2), 100 pkt/s each, 5000-bit thresholds and
// 20000-bit transfers. Channel 1 alone cannot keep up with the packet
// load; channel 2 has surplus.
SimConfig kps_demo_config(bool kps_enabled);

// Fast-cadence single channel (reduced raw-key target, 20 MHz source)
// whose pool exhausts within seconds at a few hundred packets per
// second; used to probe forged-frame acceptance inside and outside
// exhaustion windows.
SimConfig attack_window_config(std::uint64_t seed, double tx_rate,
                               const std::vector<double>& forge_times);

}  // namespace qkdmg::sim
