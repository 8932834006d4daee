#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "qkdmg/link/frame.hpp"
#include "qkdmg/pool/key_pool.hpp"

namespace qkdmg::net {

// Mirrored-pool synchronization: both ends of a QKD link hold identical
// key bits, so the receiver resolves a frame's one-time key by sequence
// number instead of re-extracting it.
struct KeySync {
    std::unordered_map<std::uint32_t, std::vector<pool::KeySlice>> by_seq;

    void remember(std::uint32_t seq, std::vector<pool::KeySlice> slices) {
        by_seq.emplace(seq, std::move(slices));
    }
    std::optional<std::vector<pool::KeySlice>> take(std::uint32_t seq) {
        auto it = by_seq.find(seq);
        if (it == by_seq.end()) {
            return std::nullopt;
        }
        auto slices = std::move(it->second);
        by_seq.erase(it);
        return slices;
    }
};

struct PlantRecord {
    double t = 0.0;
    double p_mw = 0.0;
    double q_mvar = 0.0;
    bool attacker = false;
};

// Minimal stand-in for the controlled plant: records the applied P-Q
// references. References start at (0, 0) and change only through
// accepted control frames.
struct PlantStub {
    double p_ref_mw = 0.0;
    double q_ref_mvar = 0.0;
    bool compromised = false;  // latches once an attacker frame is accepted
    std::vector<PlantRecord> history;

    void apply(double t, double p_mw, double q_mvar, bool attacker) {
        p_ref_mw = p_mw;
        q_ref_mvar = q_mvar;
        compromised = compromised || attacker;
        history.push_back({t, p_mw, q_mvar, attacker});
    }
};

enum class MgccMode { listening, sending };

struct MgccResult {
    std::optional<link::Frame> control;  // absent on shortage or bad input
    bool shortage = false;
    bool malformed = false;
    bool measurement_mismatch = false;
    std::uint64_t key_bits_consumed = 0;
    double measurement_mw = 0.0;
};

// Per-frame key budget: 64 bits pay the pad, an optional further 64
// bits key the one-time authentication tag.
inline std::uint64_t packet_key_cost(bool authenticate) {
    return link::kPacketKeyBits * (authenticate ? 2 : 1);
}

// Control-center state machine: listens for measurement datagrams and
// answers each successfully keyed one with an OTP control frame. The
// mode swings listening -> sending -> listening once per processed
// packet; a control frame goes out only after a full 64-bit extraction.
class MgccEndpoint {
  public:
    explicit MgccEndpoint(std::uint8_t addr) : addr_(addr) {}

    std::uint8_t address() const { return addr_; }
    MgccMode mode() const { return mode_; }
    std::uint64_t sending_transitions() const { return sending_transitions_; }
    std::uint64_t measurements_processed() const { return measurements_processed_; }
    std::uint64_t shortages() const { return shortages_; }

    MgccResult on_measurement(std::span<const std::uint8_t> octets, std::uint8_t controller_addr,
                              pool::KeyPool& pool, KeySync& control_sync, KeySync& measurement_sync,
                              double p_ref_mw, double q_ref_mvar, bool authenticate = false);

  private:
    std::uint8_t addr_;
    MgccMode mode_ = MgccMode::listening;
    std::uint64_t sending_transitions_ = 0;
    std::uint64_t measurements_processed_ = 0;
    std::uint64_t shortages_ = 0;
    std::unordered_map<std::uint8_t, std::uint32_t> next_seq_;  // per controller
};

enum class ControlOutcome {
    applied,           // authenticated control frame applied
    attacker_applied,  // forged frame accepted during key exhaustion
    rejected,          // mismatched key material or forged frame with keys available
    malformed,
};

struct ControllerResult {
    ControlOutcome outcome = ControlOutcome::rejected;
    double p_mw = 0.0;
    double q_mvar = 0.0;
};

// Local-controller endpoint: decrypts control frames against the
// mirrored pool and drives the plant stub. A plaintext (forged) frame
// is accepted only while the link's pool cannot supply a packet key.
class ControllerEndpoint {
  public:
    explicit ControllerEndpoint(std::uint8_t addr) : addr_(addr) {}

    std::uint8_t address() const { return addr_; }
    PlantStub& plant() { return plant_; }
    const PlantStub& plant() const { return plant_; }

    ControllerResult on_control(std::span<const std::uint8_t> octets, const pool::KeyPool& pool,
                                KeySync& control_sync, double now, bool authenticate = false);

  private:
    std::uint8_t addr_;
    PlantStub plant_;
};

// Measurement source standing in for the plant-side telemetry card:
// emits one 64-bit load measurement per packet cycle, optionally
// OTP-encrypted against the shared pool.
class TelemetryEndpoint {
  public:
    TelemetryEndpoint(std::uint8_t addr, std::uint8_t mgcc_addr) : addr_(addr), mgcc_addr_(mgcc_addr) {}

    std::uint8_t address() const { return addr_; }

    // Returns the measurement frame, or nullopt on key shortage when
    // encryption is requested.
    std::optional<link::Frame> make_measurement(double value_mw, bool encrypt,
                                                pool::KeyPool& pool, KeySync& measurement_sync);

  private:
    std::uint8_t addr_;
    std::uint8_t mgcc_addr_;
    std::uint32_t next_seq_ = 1;
};

}  // namespace qkdmg::net
