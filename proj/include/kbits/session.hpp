#pragma once

#include "kbits/bitpool.hpp"
#include "kbits/frame.hpp"
#include "kbits/transport.hpp"

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>

namespace kbits {

// One protocol round over a live transport.  Both ends hold a BitPoolState
// with identical content; a successful round advances both pools in lock
// step, a failed round leaves both pools untouched.
struct SessionOptions {
    double sigma_v = 0.0;  // cloaking noise scale (TX side)
    std::uint64_t lambda = 10000;
    // the 256-bit key-equality digest is public; its worst-case information
    // value is charged to the security parameter unless explicitly waived
    std::uint64_t digest_surcharge = 256;
    PaMode pa_mode = PaMode::permute;
    std::array<std::uint8_t, 16> shuffle_seed{};
    std::optional<std::uint64_t> t_override;
    std::optional<double> p_success_override;  // else analytic from sigma_v
    std::uint64_t noise_seed = 1;
    std::chrono::milliseconds timeout{30000};
};

struct RoundResult {
    RoundOutput output;
    std::uint32_t round = 0;  // 1-based wire round id
};

// canonical HELLO digest over the negotiated geometry
std::array<std::uint8_t, 32> config_digest(const MaryConfig& cfg, std::uint64_t a);
// distilled-key digest: SHA-256 over bit length (u64 BE) then packed bits
std::array<std::uint8_t, 32> z_digest(const BitVec& z_bits);

RoundResult run_tx_round(Transport& t, BitPoolState& pool, const BitVec& fresh_bits,
                         const SessionOptions& opt);
RoundResult run_rx_round(Transport& t, BitPoolState& pool, const SessionOptions& opt);

// ---- passive eavesdropper ----

// Everything a wire observer can extract from one recorded TX->RX byte
// stream: the cloaked samples, a maximum-likelihood guess per sample, and
// the public distillation parameters.
struct TapReport {
    std::vector<WireCode> samples;
    BitVec bit_guesses;
    std::optional<PaParamsPayload> pa;
    std::uint32_t rounds_seen = 0;
};

TapReport run_tap(const Bytes& transcript, const MaryConfig& cfg);

// fraction of positions where two equal-length bit strings agree
double agreement(const BitVec& guesses, const BitVec& truth);

// The tap's best effort at the distilled key: its per-sample bit guesses,
// coin flips for the never-transmitted basis bits, then the public
// reduction.  Requires the transcript's PA parameters.
BitVec tap_reconstruct_z(const TapReport& report, const MaryConfig& cfg,
                         std::uint64_t coin_seed);

}  // namespace kbits
