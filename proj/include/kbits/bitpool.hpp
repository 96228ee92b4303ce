#pragma once

#include "kbits/bits.hpp"
#include "kbits/codec.hpp"
#include "kbits/noise.hpp"
#include "kbits/security.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace kbits {

// How the kept r bits are extracted from the shuffled/hashed n bits.
enum class PaMode : std::uint8_t {
    permute = 0,   // seeded permutation, keep the first r (default)
    toeplitz = 1,  // universal-hash compression n -> r
};

// Per-session distillation state: the m*a shared basis bits that encode the
// next round, plus the fixed geometry.
struct BitPoolState {
    MaryConfig mary_cfg = MaryConfig::make(1024, 10.0);
    std::uint64_t a = 0;  // fresh bits per round
    std::uint64_t round_index = 0;
    BitVec basis_bits;  // always exactly m*a bits

    void validate() const;
};

BitPoolState make_pool(const MaryConfig& cfg, std::uint64_t a, const BitVec& basis_bits);

struct RoundParams {
    std::uint64_t lambda = 0;                    // security parameter, >= 0
    std::array<std::uint8_t, 16> shuffle_seed{}; // public
    std::optional<std::uint64_t> t_override;     // else t = leaked_bits(a, stats)
    PaMode pa_mode = PaMode::permute;
};

struct RoundOutput {
    BitVec z_bits;         // a - t - lambda fresh key bits
    BitVec new_basis_bits; // m*a bits, replaces the pool content
    LeakBudget budget;
};

// consecutive m-bit blocks of the pool, each mapped through basis_index
std::vector<BasisIndex> next_bases(const BitPoolState& state);

// seeded Fisher-Yates permutation; same seed => same permutation of positions
BitVec shuffle(const BitVec& bits, const std::array<std::uint8_t, 16>& seed);

// The privacy-amplification core: concatenate fresh || basis_bits (n bits),
// reduce to r = n - t - lambda via the selected mode, split the kept string
// into z_bits (front) and the new bases (back), and advance the state.
// Throws InsufficientBits when a <= t + lambda; the state is untouched on
// any error.
RoundOutput distill(const BitVec& shared_fresh, BitPoolState& state,
                    const RoundParams& params, const AttackStats& stats);

// line coding of one round: a cloaked sample per fresh bit / its inverse
std::vector<WireCode> encode_round(const BitPoolState& state, const BitVec& fresh_bits,
                                   CloakNoiseSource& noise);
BitVec decode_round(const BitPoolState& state, const std::vector<WireCode>& samples);

struct TxRound {
    std::vector<WireCode> samples;  // what goes on the wire
    RoundOutput output;
};

TxRound run_round_tx(BitPoolState& state, const BitVec& fresh_bits, CloakNoiseSource& noise,
                     const RoundParams& params, const AttackStats& stats);
RoundOutput run_round_rx(BitPoolState& state, const std::vector<WireCode>& samples,
                         const RoundParams& params, const AttackStats& stats);

// Binary pool snapshot: "KBPS", version, m, a, round_index, packed bits, CRC.
void save_pool(const BitPoolState& state, const std::string& path);
BitPoolState load_pool(const std::string& path, double b_max);

// z bits appended MSB-first; a final partial byte is zero-padded
void append_keystore(const std::string& path, const BitVec& z_bits);
BitVec read_keystore(const std::string& path);

}  // namespace kbits
