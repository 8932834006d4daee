#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qkdmg/qkd/sweep.hpp"
#include "qkdmg/sim/trace.hpp"

namespace qkdmg::sim {

enum class TraceTable { pools, packets, events };

// Fixed-schema CSV renderings of a trace. Output is byte-deterministic
// for a deterministic trace.
void emit_pools_csv(const Trace& trace, std::ostream& out);    // time_s,pool_id,level_bits
void emit_packets_csv(const Trace& trace, std::ostream& out);  // time_s,seq,src,dst,kind,outcome
void emit_events_csv(const Trace& trace, std::ostream& out);   // time_s,pool_id,level_bits,event_type,detail

void emit_sweep_csv(const std::vector<qkd::SweepPoint>& points, std::ostream& out);

// Writes one table to a file; throws IoError when the file cannot be
// created or written.
void emit_csv(const Trace& trace, TraceTable table, const std::string& path);

}  // namespace qkdmg::sim
