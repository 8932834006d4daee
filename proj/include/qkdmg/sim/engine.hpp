#pragma once

#include "qkdmg/sim/config.hpp"
#include "qkdmg/sim/trace.hpp"

namespace qkdmg::sim {

// Runs the scenario on a virtual clock: key-block completions feed the
// pools, packet cycles drive the measurement/control exchange, sharing
// checks fire on every pool change, and scheduled attacks perturb the
// channel or inject forged control frames. Identical configs produce
// identical traces.
Trace run_simulation(const SimConfig& cfg);

}  // namespace qkdmg::sim
