#include "qkdmg/sim/csv.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "qkdmg/sim/config.hpp"

namespace qkdmg::sim {

namespace {

std::string fmt_time(double t) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", t);
    return buf;
}

std::string fmt_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

const char* kind_name(PacketKind k) {
    switch (k) {
        case PacketKind::measurement:
            return "measurement";
        case PacketKind::control:
            return "control";
        case PacketKind::attack:
            return "attack";
    }
    return "?";
}

const char* outcome_name(PacketOutcome o) {
    switch (o) {
        case PacketOutcome::delivered:
            return "delivered";
        case PacketOutcome::applied:
            return "applied";
        case PacketOutcome::suppressed:
            return "suppressed";
        case PacketOutcome::rejected:
            return "rejected";
        case PacketOutcome::dropped:
            return "dropped";
    }
    return "?";
}

struct EventRow {
    double t;
    int seq;  // insertion order within the same timestamp
    std::string line;
};

void push_row(std::vector<EventRow>& rows, double t, int pool_id, std::uint64_t level,
              const std::string& type, const std::string& detail) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s,%d,%" PRIu64 ",%s,%s", fmt_time(t).c_str(), pool_id,
                  level, type.c_str(), detail.c_str());
    rows.push_back({t, static_cast<int>(rows.size()), buf});
}

}  // namespace

void emit_pools_csv(const Trace& trace, std::ostream& out) {
    out << "time_s,pool_id,level_bits\n";
    for (const auto& s : trace.pool_samples) {
        out << fmt_time(s.t) << ',' << s.pool_id << ',' << s.level << '\n';
    }
}

void emit_packets_csv(const Trace& trace, std::ostream& out) {
    out << "time_s,seq,src,dst,kind,outcome\n";
    for (const auto& p : trace.packets) {
        out << fmt_time(p.t) << ',' << p.seq << ',' << static_cast<int>(p.src) << ','
            << static_cast<int>(p.dst) << ',' << kind_name(p.kind) << ','
            << outcome_name(p.outcome) << '\n';
    }
}

void emit_events_csv(const Trace& trace, std::ostream& out) {
    std::vector<EventRow> rows;
    for (const auto& d : trace.deposits) {
        push_row(rows, d.t, d.pool_id, d.level_after, "deposit",
                 "bits=+" + std::to_string(d.bits));
    }
    for (const auto& tr : trace.transfers) {
        char detail[120];
        std::snprintf(detail, sizeof(detail),
                      "donor=%d delta=-%" PRIu64 "/+%" PRIu64 " key_cost=%" PRIu64, tr.donor_id,
                      tr.bits, tr.bits - tr.key_cost, tr.key_cost);
        push_row(rows, tr.t, tr.recipient_id, tr.recipient_level_after, "transfer", detail);
    }
    for (const auto& s : trace.kps_skips) {
        push_row(rows, s.t, s.pool_id, s.level, "kps_skip",
                 s.reason == pool::KpsSkipReason::no_eligible_donor ? "no_eligible_donor"
                                                                    : "recipient_cannot_pay");
    }
    for (const auto& e : trace.exhaustions) {
        push_row(rows, e.start, e.channel_id, e.start_level, "exhaustion_start", "");
        push_row(rows, e.end, e.channel_id, 0, "exhaustion_end",
                 e.truncated ? "truncated" : "");
    }
    for (const auto& r : trace.reference_changes) {
        char detail[96];
        std::snprintf(detail, sizeof(detail), "p_mw=%s q_mvar=%s", fmt_real(r.p_mw).c_str(),
                      fmt_real(r.q_mvar).c_str());
        push_row(rows, r.t, r.channel_id, r.pool_level,
                 r.attacker ? "attacker_reference_applied" : "reference_applied", detail);
    }
    for (const auto& c : trace.compromised) {
        push_row(rows, c.start, c.channel_id, 0, "compromised_start", "");
        push_row(rows, c.end, c.channel_id, 0, "compromised_end",
                 c.truncated ? "truncated" : "");
    }
    for (const auto& o : trace.overflows) {
        push_row(rows, o.t, o.pool_id, 0, "overflow", "bits_lost=" + std::to_string(o.bits_lost));
    }
    std::stable_sort(rows.begin(), rows.end(), [](const EventRow& a, const EventRow& b) {
        return a.t < b.t;
    });
    out << "time_s,pool_id,level_bits,event_type,detail\n";
    for (const auto& r : rows) {
        out << r.line << '\n';
    }
}

void emit_sweep_csv(const std::vector<qkd::SweepPoint>& points, std::ostream& out) {
    out << "length_km,e_mis,eta_bob,ell_bits,pulses,speed_bits_per_s,phi_x,xi_x0,xi_x1,"
           "xi_z0,xi_z1,delta_z1,lambda_ec,insufficient\n";
    for (const auto& p : points) {
        const auto& r = p.result;
        out << fmt_real(p.length_km) << ',' << fmt_real(p.e_mis) << ',' << fmt_real(p.eta_bob)
            << ',' << r.ell << ',' << r.pulses << ',' << fmt_real(r.speed_bps) << ','
            << fmt_real(r.phi_x) << ',' << fmt_real(r.xi_x0) << ',' << fmt_real(r.xi_x1) << ','
            << fmt_real(r.xi_z0) << ',' << fmt_real(r.xi_z1) << ',' << fmt_real(r.delta_z1)
            << ',' << fmt_real(r.lambda_ec) << ',' << (r.insufficient_stats ? 1 : 0) << '\n';
    }
}

void emit_csv(const Trace& trace, TraceTable table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot create " + path);
    }
    switch (table) {
        case TraceTable::pools:
            emit_pools_csv(trace, out);
            break;
        case TraceTable::packets:
            emit_packets_csv(trace, out);
            break;
        case TraceTable::events:
            emit_events_csv(trace, out);
            break;
    }
    out.flush();
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

}  // namespace qkdmg::sim
