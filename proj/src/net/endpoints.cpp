#include "qkdmg/net/endpoints.hpp"

#include "qkdmg/link/otp.hpp"

namespace qkdmg::net {

MgccResult MgccEndpoint::on_measurement(std::span<const std::uint8_t> octets,
                                        std::uint8_t controller_addr, pool::KeyPool& pool,
                                        KeySync& control_sync, KeySync& measurement_sync,
                                        double p_ref_mw, double q_ref_mvar, bool authenticate) {
    MgccResult res;
    link::Frame measurement;
    try {
        measurement = link::frame_decode(octets);
    } catch (const link::MalformedFrame&) {
        res.malformed = true;
        return res;
    }

    std::uint64_t payload = measurement.payload;
    if (measurement.mode == link::CipherMode::otp) {
        auto slices = measurement_sync.take(measurement.seq);
        if (!slices) {
            res.measurement_mismatch = true;
            return res;
        }
        pool::KeyMaterial key;
        key.slices = std::move(*slices);
        key.bytes = pool::materialize(key.slices);
        key.bit_count = link::kPacketKeyBits;
        payload = link::otp_decrypt(payload, key.as_u64());
    }
    res.measurement_mw = link::decode_power_refs(payload).first;

    // One key extraction per arriving packet; the control frame exists
    // only when the pool can fund it.
    const std::uint64_t cost = packet_key_cost(authenticate);
    auto key = pool.extract(cost);
    if (!key) {
        res.shortage = true;
        ++shortages_;
        return res;
    }
    res.key_bits_consumed = cost;

    link::Frame control;
    control.seq = ++next_seq_[controller_addr];
    control.src = addr_;
    control.dst = controller_addr;
    control.mode = link::CipherMode::otp;
    control.payload = link::otp_encrypt(link::encode_power_refs(p_ref_mw, q_ref_mvar),
                                        key->as_u64());
    if (authenticate) {
        // Encrypt-then-tag: the second 64-bit half of the extraction
        // keys the one-time MAC over the ciphertext.
        std::uint64_t mac_key = 0;
        for (int i = 8; i < 16; ++i) {
            mac_key = (mac_key << 8) | key->bytes[static_cast<std::size_t>(i)];
        }
        control.tag = link::one_time_tag(control.payload, mac_key);
        control.has_tag = true;
    }
    control_sync.remember(control.seq, key->slices);

    mode_ = MgccMode::sending;
    ++sending_transitions_;
    ++measurements_processed_;
    mode_ = MgccMode::listening;

    res.control = control;
    return res;
}

ControllerResult ControllerEndpoint::on_control(std::span<const std::uint8_t> octets,
                                                const pool::KeyPool& pool, KeySync& control_sync,
                                                double now, bool authenticate) {
    ControllerResult res;
    link::Frame frame;
    try {
        frame = link::frame_decode(octets);
    } catch (const link::MalformedFrame&) {
        res.outcome = ControlOutcome::malformed;
        return res;
    }

    if (frame.mode == link::CipherMode::otp) {
        auto slices = control_sync.take(frame.seq);
        if (!slices) {
            res.outcome = ControlOutcome::rejected;  // no matching key: mismatch
            return res;
        }
        pool::KeyMaterial key;
        key.slices = std::move(*slices);
        key.bytes = pool::materialize(key.slices);
        key.bit_count = packet_key_cost(authenticate);
        if (authenticate) {
            std::uint64_t mac_key = 0;
            for (int i = 8; i < 16; ++i) {
                mac_key = (mac_key << 8) | key.bytes[static_cast<std::size_t>(i)];
            }
            // The wire carries the truncated 32-bit tag.
            const std::uint64_t expected = link::one_time_tag(frame.payload, mac_key);
            if (frame.tag != (expected & 0xFFFFFFFFULL)) {
                res.outcome = ControlOutcome::rejected;
                return res;
            }
        }
        const std::uint64_t payload = link::otp_decrypt(frame.payload, key.as_u64());
        const auto [p_mw, q_mvar] = link::decode_power_refs(payload);
        plant_.apply(now, p_mw, q_mvar, /*attacker=*/false);
        res.outcome = ControlOutcome::applied;
        res.p_mw = p_mw;
        res.q_mvar = q_mvar;
        return res;
    }

    if (frame.mode == link::CipherMode::plain) {
        // With keys available the link runs authenticated; a plaintext
        // frame cannot pass. During exhaustion nothing protects the
        // link and the forged reference lands.
        if (pool.level() >= packet_key_cost(authenticate)) {
            res.outcome = ControlOutcome::rejected;
            return res;
        }
        const auto [p_mw, q_mvar] = link::decode_power_refs(frame.payload);
        plant_.apply(now, p_mw, q_mvar, /*attacker=*/true);
        res.outcome = ControlOutcome::attacker_applied;
        res.p_mw = p_mw;
        res.q_mvar = q_mvar;
        return res;
    }

    res.outcome = ControlOutcome::rejected;  // block mode is not a control transform
    return res;
}

std::optional<link::Frame> TelemetryEndpoint::make_measurement(double value_mw, bool encrypt,
                                                          pool::KeyPool& pool,
                                                          KeySync& measurement_sync) {
    link::Frame f;
    f.src = addr_;
    f.dst = mgcc_addr_;
    f.payload = link::encode_power_refs(value_mw, 0.0);
    if (!encrypt) {
        f.seq = next_seq_++;
        f.mode = link::CipherMode::plain;
        return f;
    }
    auto key = pool.extract(link::kPacketKeyBits);
    if (!key) {
        return std::nullopt;
    }
    f.seq = next_seq_++;
    f.mode = link::CipherMode::otp;
    f.payload = link::otp_encrypt(f.payload, key->as_u64());
    measurement_sync.remember(f.seq, key->slices);
    return f;
}

}  // namespace qkdmg::net
