#include "qkdmg/sim/engine.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <queue>
#include <stdexcept>

#include "qkdmg/link/frame.hpp"
#include "qkdmg/link/transfer_cipher.hpp"
#include "qkdmg/net/endpoints.hpp"
#include "qkdmg/net/transport.hpp"
#include "qkdmg/qkd/finite_key.hpp"
#include "qkdmg/qkd/statistics.hpp"

namespace qkdmg::sim {

namespace {

constexpr std::uint8_t kMgccAddr = 0;
constexpr std::uint8_t kTelemetryAddrBase = 128;

// Event ordering at equal timestamps: noise attacks first (so a t=0
// attack behaves like a static config), then key-block deposits, then
// traffic, then forged injections, then metric samples.
enum EventPrio : int {
    kPrioNoise = 0,
    kPrioDeposit = 1,
    kPrioTraffic = 2,
    kPrioForge = 3,
    kPrioSample = 4,
};

enum class EventType { attack_noise, block_deposit, packet_cycle, delivery, attack_forge, sample };

struct Event {
    double t = 0.0;
    int prio = 0;
    std::uint64_t order = 0;
    EventType type = EventType::sample;
    int channel_index = -1;
    std::size_t attack_index = 0;
    std::uint8_t endpoint = 0;
};

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        if (a.t != b.t) {
            return a.t > b.t;
        }
        if (a.prio != b.prio) {
            return a.prio > b.prio;
        }
        return a.order > b.order;
    }
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed ^ (salt * 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

struct ChannelRuntime {
    ChannelSpec spec;
    double current_e_mis = 0.0;
    std::uint64_t pulses_per_block = 0;
    double block_period_s = 0.0;
    std::uint64_t blocks_deposited = 0;
    pool::KeyPool pool;
    net::KeySync control_sync;
    net::KeySync measurement_sync;
    net::ControllerEndpoint controller;
    net::TelemetryEndpoint telemetry;
    std::map<double, std::uint64_t> block_bits_by_emis;
    bool exhaustion_open = false;
    double exhaustion_since = 0.0;
    std::uint64_t exhaustion_start_level = 0;
    bool compromised_open = false;
    double compromised_since = 0.0;
    std::optional<pool::KpsSkipReason> last_skip;  // dedupes repeated sharing-skip records

    ChannelRuntime(const ChannelSpec& s, std::uint64_t pool_seed)
        : spec(s),
          current_e_mis(s.channel.e_mis),
          pool(s.id, pool_seed, s.pool_threshold, s.pool_capacity),
          controller(static_cast<std::uint8_t>(s.id)),
          telemetry(static_cast<std::uint8_t>(kTelemetryAddrBase + s.id), kMgccAddr) {}

    std::uint8_t controller_addr() const { return static_cast<std::uint8_t>(spec.id); }
    std::uint8_t telemetry_addr() const {
        return static_cast<std::uint8_t>(kTelemetryAddrBase + spec.id);
    }
};

class Engine {
  public:
    explicit Engine(const SimConfig& cfg) : cfg_(cfg), transport_(cfg.transport_latency_s) {}

    Trace run();

  private:
    void schedule(Event ev) {
        if (ev.t < cfg_.duration_s) {
            ev.order = next_order_++;
            heap_.push(ev);
        }
    }

    ChannelRuntime& channel_by_id(int id) {
        for (auto& ch : channels_) {
            if (ch.spec.id == id) {
                return ch;
            }
        }
        throw std::logic_error("unknown channel id");
    }

    std::pair<double, double> reference_at(double t) const {
        std::pair<double, double> ref{0.0, 0.0};
        for (const auto& r : references_) {
            if (r.t <= t) {
                ref = {r.p_mw, r.q_mvar};
            } else {
                break;
            }
        }
        return ref;
    }

    double load_at(double t) const {
        double mw = 0.0;
        for (const auto& l : loads_) {
            if (l.t <= t) {
                mw = l.mw;
            } else {
                break;
            }
        }
        return mw;
    }

    std::uint64_t block_bits(ChannelRuntime& ch) {
        auto it = ch.block_bits_by_emis.find(ch.current_e_mis);
        if (it != ch.block_bits_by_emis.end()) {
            return it->second;
        }
        qkd::ChannelModel model = ch.spec.channel;
        model.e_mis = ch.current_e_mis;
        const auto stats = qkd::expected_statistics(ch.spec.protocol, model);
        const auto result = qkd::secret_key_length(stats, ch.spec.protocol);
        ch.block_bits_by_emis.emplace(ch.current_e_mis, result.ell);
        return result.ell;
    }

    void record_packet(double t, std::uint32_t seq, std::uint8_t src, std::uint8_t dst,
                       PacketKind kind, PacketOutcome outcome) {
        if (cfg_.record_packets) {
            trace_.packets.push_back({t, seq, src, dst, kind, outcome});
        }
    }

    void open_exhaustion(ChannelRuntime& ch, double t) {
        if (!ch.exhaustion_open) {
            ch.exhaustion_open = true;
            ch.exhaustion_since = t;
            ch.exhaustion_start_level = ch.pool.level();
        }
    }

    void close_exhaustion(ChannelRuntime& ch, double t) {
        if (ch.exhaustion_open) {
            trace_.exhaustions.push_back(
                {ch.spec.id, ch.exhaustion_since, t, false, ch.exhaustion_start_level});
            ch.exhaustion_open = false;
        }
    }

    void run_kps(double t) {
        if (!cfg_.kps.enabled || channels_.size() < 2) {
            return;
        }
        std::vector<pool::KeyPool*> pools;
        pools.reserve(channels_.size());
        for (auto& ch : channels_) {
            pools.push_back(&ch.pool);
        }
        const auto outcome = pool::kps_check_and_transfer(pools, cfg_.kps.policy);
        for (const auto& ev : outcome.transfers) {
            // The shared bits travel encrypted under the recipient-pool
            // cipher key; run the actual transform end to end.
            const auto key_bytes = ev.cipher_key.bytes;
            std::span<const std::uint8_t> key(key_bytes.data(), link::kTransferKeyBytes);
            const auto ciphertext = link::block_encrypt_transfer(ev.payload.bytes, key);
            const auto plain = link::block_decrypt_transfer(ciphertext, key);
            if (!plain || *plain != ev.payload.bytes) {
                throw std::logic_error("transfer cipher round-trip failed");
            }
            trace_.transfers.push_back({t, ev.recipient_id, ev.donor_id, ev.transferred_bits,
                                        ev.cipher_key_bits, ev.donor_level_after,
                                        ev.recipient_level_after});
            trace_.totals[ev.recipient_id].transfer_in_bits += ev.transferred_bits;
            trace_.totals[ev.recipient_id].transfer_key_bits += ev.cipher_key_bits;
            trace_.totals[ev.donor_id].transfer_out_bits += ev.transferred_bits;
            channel_by_id(ev.recipient_id).last_skip.reset();
            channel_by_id(ev.donor_id).last_skip.reset();
        }
        for (const auto& skip : outcome.skips) {
            auto& ch = channel_by_id(skip.pool_id);
            if (ch.last_skip != skip.reason) {
                trace_.kps_skips.push_back({t, skip.pool_id, skip.level, skip.reason});
                ch.last_skip = skip.reason;
            }
        }
    }

    void on_block_deposit(ChannelRuntime& ch, double t, bool initial) {
        const std::uint64_t ell = block_bits(ch);
        const std::uint64_t bits = initial ? ell * ch.spec.initial_blocks : ell;
        if (bits > 0) {
            const std::uint64_t lost = ch.pool.deposit(bits);
            trace_.deposits.push_back({t, ch.spec.id, bits - lost, ch.pool.level()});
            trace_.totals[ch.spec.id].qkd_deposited_bits += bits - lost;
            ch.last_skip.reset();
            if (lost > 0) {
                trace_.overflows.push_back({t, ch.spec.id, lost});
                trace_.totals[ch.spec.id].overflow_bits += lost;
            }
        }
        run_kps(t);
        ++ch.blocks_deposited;
        Event next;
        next.t = static_cast<double>(ch.blocks_deposited) * ch.block_period_s;
        next.prio = kPrioDeposit;
        next.type = EventType::block_deposit;
        next.channel_index = static_cast<int>(&ch - channels_.data());
        schedule(next);
    }

    void on_packet_cycle(double t) {
        for (auto& ch : channels_) {
            auto frame = ch.telemetry.make_measurement(load_at(t), cfg_.encrypt_measurements,
                                                        ch.pool, ch.measurement_sync);
            auto& tot = trace_.totals[ch.spec.id];
            if (!frame) {
                ++tot.shortages;
                open_exhaustion(ch, t);
                record_packet(t, 0, ch.telemetry_addr(), kMgccAddr, PacketKind::measurement,
                              PacketOutcome::suppressed);
                run_kps(t);
                continue;
            }
            ++tot.measurements_sent;
            if (cfg_.encrypt_measurements) {
                tot.packet_key_bits += link::kPacketKeyBits;
                close_exhaustion(ch, t);
                run_kps(t);
            }
            const auto octets = link::frame_encode(*frame);
            const auto receipt = transport_.send(ch.telemetry_addr(), kMgccAddr,
                                                 {octets.begin(), octets.end()}, t);
            record_packet(t, frame->seq, ch.telemetry_addr(), kMgccAddr, PacketKind::measurement,
                          receipt.dropped ? PacketOutcome::dropped : PacketOutcome::delivered);
            if (!receipt.dropped) {
                Event ev;
                ev.t = receipt.deliver_time;
                ev.prio = kPrioTraffic;
                ev.type = EventType::delivery;
                ev.endpoint = kMgccAddr;
                schedule(ev);
            }
        }
        ++cycles_done_;
        Event next;
        next.t = static_cast<double>(cycles_done_ + 1) / cfg_.tx_rate;
        next.prio = kPrioTraffic;
        next.type = EventType::packet_cycle;
        schedule(next);
    }

    void on_mgcc_datagram(const net::Datagram& d, double t) {
        // Measurements arrive from the per-channel telemetry address.
        for (auto& ch : channels_) {
            if (ch.telemetry_addr() != d.src) {
                continue;
            }
            const auto [p_mw, q_mvar] = reference_at(t);
            const auto res = mgcc_.on_measurement(d.octets, ch.controller_addr(), ch.pool,
                                                  ch.control_sync, ch.measurement_sync, p_mw,
                                                  q_mvar, cfg_.authenticate_frames);
            auto& tot = trace_.totals[ch.spec.id];
            if (res.malformed || res.measurement_mismatch) {
                record_packet(t, 0, d.src, d.dst, PacketKind::measurement,
                              PacketOutcome::rejected);
                return;
            }
            if (res.shortage) {
                ++tot.shortages;
                open_exhaustion(ch, t);
                record_packet(t, 0, kMgccAddr, ch.controller_addr(), PacketKind::control,
                              PacketOutcome::suppressed);
                run_kps(t);
                return;
            }
            tot.packet_key_bits += res.key_bits_consumed;
            ++tot.controls_sent;
            close_exhaustion(ch, t);
            run_kps(t);
            const auto octets = link::frame_encode(*res.control);
            const auto receipt = transport_.send(kMgccAddr, ch.controller_addr(),
                                                 {octets.begin(), octets.end()}, t);
            record_packet(t, res.control->seq, kMgccAddr, ch.controller_addr(),
                          PacketKind::control,
                          receipt.dropped ? PacketOutcome::dropped : PacketOutcome::delivered);
            if (!receipt.dropped) {
                Event ev;
                ev.t = receipt.deliver_time;
                ev.prio = kPrioTraffic;
                ev.type = EventType::delivery;
                ev.endpoint = ch.controller_addr();
                schedule(ev);
            }
            return;
        }
    }

    void on_controller_datagram(ChannelRuntime& ch, const net::Datagram& d, double t) {
        const auto res = ch.controller.on_control(d.octets, ch.pool, ch.control_sync, t,
                                                  cfg_.authenticate_frames);
        auto& tot = trace_.totals[ch.spec.id];
        switch (res.outcome) {
            case net::ControlOutcome::applied:
                ++tot.controls_applied;
                trace_.reference_changes.push_back(
                    {t, ch.spec.id, res.p_mw, res.q_mvar, false, ch.pool.level()});
                if (ch.compromised_open) {
                    trace_.compromised.push_back({ch.spec.id, ch.compromised_since, t, false});
                    ch.compromised_open = false;
                }
                record_packet(t, 0, d.src, d.dst, PacketKind::control, PacketOutcome::applied);
                break;
            case net::ControlOutcome::attacker_applied:
                ++tot.attacks_applied;
                trace_.reference_changes.push_back(
                    {t, ch.spec.id, res.p_mw, res.q_mvar, true, ch.pool.level()});
                if (!ch.compromised_open) {
                    ch.compromised_open = true;
                    ch.compromised_since = t;
                }
                record_packet(t, 0, d.src, d.dst, PacketKind::attack, PacketOutcome::applied);
                break;
            case net::ControlOutcome::rejected:
            case net::ControlOutcome::malformed: {
                link::Frame probe;
                bool plain = false;
                try {
                    probe = link::frame_decode(d.octets);
                    plain = probe.mode == link::CipherMode::plain;
                } catch (const link::MalformedFrame&) {
                }
                record_packet(t, 0, d.src, d.dst,
                              plain ? PacketKind::attack : PacketKind::control,
                              PacketOutcome::rejected);
                break;
            }
        }
    }

    void on_delivery(std::uint8_t endpoint, double t) {
        for (auto& d : transport_.poll(endpoint, t)) {
            if (endpoint == kMgccAddr) {
                on_mgcc_datagram(d, t);
            } else {
                for (auto& ch : channels_) {
                    if (ch.controller_addr() == endpoint) {
                        on_controller_datagram(ch, d, t);
                        break;
                    }
                }
            }
        }
    }

    void on_attack(const AttackSpec& attack, double t) {
        auto& ch = channel_by_id(attack.channel_id);
        if (attack.kind == AttackKind::noise) {
            ch.current_e_mis = attack.e_mis;  // takes effect at the next block completion
            return;
        }
        link::Frame forged;
        forged.seq = 0x80000000U + forge_counter_++;
        forged.src = kMgccAddr;  // spoofed source
        forged.dst = ch.controller_addr();
        forged.mode = link::CipherMode::plain;
        forged.payload = link::encode_power_refs(attack.p_mw, attack.q_mvar);
        ++trace_.totals[ch.spec.id].attack_frames;
        const auto octets = link::frame_encode(forged);
        const auto receipt =
            transport_.send(kMgccAddr, ch.controller_addr(), {octets.begin(), octets.end()}, t);
        record_packet(t, forged.seq, kMgccAddr, ch.controller_addr(), PacketKind::attack,
                      receipt.dropped ? PacketOutcome::dropped : PacketOutcome::delivered);
        if (!receipt.dropped) {
            Event ev;
            ev.t = receipt.deliver_time;
            ev.prio = kPrioTraffic;
            ev.type = EventType::delivery;
            ev.endpoint = ch.controller_addr();
            schedule(ev);
        }
    }

    void on_sample(double t) {
        for (auto& ch : channels_) {
            trace_.pool_samples.push_back({t, ch.spec.id, ch.pool.level()});
        }
        ++samples_done_;
        Event next;
        next.t = static_cast<double>(samples_done_) * cfg_.sample_interval_s;
        next.prio = kPrioSample;
        next.type = EventType::sample;
        schedule(next);
    }

    SimConfig cfg_;
    Trace trace_;
    net::SimTransport transport_;
    net::MgccEndpoint mgcc_{kMgccAddr};
    std::vector<ChannelRuntime> channels_;
    std::vector<ReferencePoint> references_;
    std::vector<LoadPoint> loads_;
    std::priority_queue<Event, std::vector<Event>, EventAfter> heap_;
    std::uint64_t next_order_ = 0;
    std::uint64_t cycles_done_ = 0;
    std::uint64_t samples_done_ = 0;
    std::uint32_t forge_counter_ = 0;
};

Trace Engine::run() {
    cfg_.validate();
    trace_.duration_s = cfg_.duration_s;

    references_ = cfg_.references;
    std::stable_sort(references_.begin(), references_.end(),
                     [](const auto& a, const auto& b) { return a.t < b.t; });
    loads_ = cfg_.loads;
    std::stable_sort(loads_.begin(), loads_.end(),
                     [](const auto& a, const auto& b) { return a.t < b.t; });

    transport_.register_endpoint(kMgccAddr);
    channels_.reserve(cfg_.channels.size());
    for (const auto& spec : cfg_.channels) {
        channels_.emplace_back(spec, mix_seed(cfg_.seed, static_cast<std::uint64_t>(spec.id)));
        auto& ch = channels_.back();
        const auto stats = qkd::expected_statistics(spec.protocol, spec.channel);
        ch.pulses_per_block = stats.pulses;
        ch.block_period_s = static_cast<double>(stats.pulses) / spec.channel.pulse_rate;
        transport_.register_endpoint(ch.controller_addr());
        transport_.register_endpoint(ch.telemetry_addr());

        auto& tot = trace_.totals[spec.id];
        tot.block_period_s = ch.block_period_s;
    }

    // Recurring event seeds: the banked key blocks at t = 0, the first
    // packet cycle, the sample train, and the scheduled attacks.
    for (std::size_t i = 0; i < channels_.size(); ++i) {
        Event ev;
        ev.t = 0.0;
        ev.prio = kPrioDeposit;
        ev.type = EventType::block_deposit;
        ev.channel_index = static_cast<int>(i);
        schedule(ev);
    }
    {
        Event ev;
        ev.t = 1.0 / cfg_.tx_rate;
        ev.prio = kPrioTraffic;
        ev.type = EventType::packet_cycle;
        schedule(ev);
    }
    {
        Event ev;
        ev.t = 0.0;
        ev.prio = kPrioSample;
        ev.type = EventType::sample;
        schedule(ev);
    }
    for (std::size_t i = 0; i < cfg_.attacks.size(); ++i) {
        Event ev;
        ev.t = cfg_.attacks[i].t;
        ev.prio = cfg_.attacks[i].kind == AttackKind::noise ? kPrioNoise : kPrioForge;
        ev.type = cfg_.attacks[i].kind == AttackKind::noise ? EventType::attack_noise
                                                            : EventType::attack_forge;
        ev.attack_index = i;
        schedule(ev);
    }

    while (!heap_.empty()) {
        const Event ev = heap_.top();
        heap_.pop();
        switch (ev.type) {
            case EventType::attack_noise:
            case EventType::attack_forge:
                on_attack(cfg_.attacks[ev.attack_index], ev.t);
                break;
            case EventType::block_deposit:
                on_block_deposit(channels_[static_cast<std::size_t>(ev.channel_index)], ev.t,
                                 channels_[static_cast<std::size_t>(ev.channel_index)]
                                         .blocks_deposited == 0);
                break;
            case EventType::packet_cycle:
                on_packet_cycle(ev.t);
                break;
            case EventType::delivery:
                on_delivery(ev.endpoint, ev.t);
                break;
            case EventType::sample:
                on_sample(ev.t);
                break;
        }
    }

    // Close open intervals and take the final snapshot at the horizon.
    for (auto& ch : channels_) {
        if (ch.exhaustion_open) {
            trace_.exhaustions.push_back({ch.spec.id, ch.exhaustion_since, cfg_.duration_s, true,
                                          ch.exhaustion_start_level});
            ch.exhaustion_open = false;
        }
        if (ch.compromised_open) {
            trace_.compromised.push_back(
                {ch.spec.id, ch.compromised_since, cfg_.duration_s, true});
            ch.compromised_open = false;
        }
        trace_.pool_samples.push_back({cfg_.duration_s, ch.spec.id, ch.pool.level()});
        auto& tot = trace_.totals[ch.spec.id];
        tot.final_level = ch.pool.level();
        tot.block_bits = ch.block_bits_by_emis.count(ch.spec.channel.e_mis) != 0
                             ? ch.block_bits_by_emis.at(ch.spec.channel.e_mis)
                             : 0;
    }
    // Intervals are appended when they close; order them by start so
    // multi-channel traces stay time-sorted.
    std::stable_sort(trace_.exhaustions.begin(), trace_.exhaustions.end(),
                     [](const auto& a, const auto& b) { return a.start < b.start; });
    std::stable_sort(trace_.compromised.begin(), trace_.compromised.end(),
                     [](const auto& a, const auto& b) { return a.start < b.start; });
    return trace_;
}

}  // namespace

Trace run_simulation(const SimConfig& cfg) {
    Engine engine(cfg);
    return engine.run();
}

}  // namespace qkdmg::sim
