#pragma once

#include "kbits/bits.hpp"
#include "kbits/bytes.hpp"
#include "kbits/rng.hpp"

#include <cstdint>
#include <vector>

namespace kbits {

// Square key matrix shared by the whole user group: d lines of d bits,
// 1-based line indices counted from the top.
struct KeyMatrix {
    std::uint64_t d = 0;
    BitVec bits;                         // d*d, row-major
    std::uint64_t remainder_bits = 0;    // surplus key bits not used by the square
    std::vector<std::uint8_t> consumed;  // advisory per-line usage flags
    std::uint64_t consumed_count = 0;

    BitVec line(std::uint64_t index) const;  // index in [1, d]
    void mark_consumed(std::uint64_t index);
    // every line used at least once: time to distill fresh key material
    bool refresh_needed() const { return d > 0 && consumed_count == d; }
};

KeyMatrix build_key_matrix(const BitVec& key_bits);

struct CipherEnvelope {
    std::vector<std::uint32_t> line_indices;  // distinct, sorted ascending, 1-based
    std::uint64_t message_bits = 0;           // true plaintext length in this block
    BitVec ciphertext;                        // exactly d bits
};

// XOR of `line_count` randomly chosen distinct lines, then XOR the (padded)
// message.  The header lists the lines in clear; secrecy rests entirely on
// the key lines.  No integrity or authentication whatsoever.
CipherEnvelope encrypt_decentralized(KeyMatrix& matrix, const BitVec& message, Rng& rng,
                                     std::uint32_t line_count = 20);
BitVec decrypt_decentralized(const KeyMatrix& matrix, const CipherEnvelope& envelope);

// multi-block wrappers: d-bit chunks, each with independently drawn lines
std::vector<CipherEnvelope> encrypt_message(KeyMatrix& matrix, const BitVec& message, Rng& rng,
                                            std::uint32_t line_count = 20);
BitVec decrypt_message(const KeyMatrix& matrix, const std::vector<CipherEnvelope>& envelopes);

// envelope wire/file format ("KBEV" ... CRC32); records are self-delimiting
Bytes envelope_to_bytes(const CipherEnvelope& envelope, std::uint64_t d);
CipherEnvelope envelope_from_bytes(const std::uint8_t* data, std::size_t len,
                                   std::size_t& consumed);
Bytes envelopes_to_bytes(const std::vector<CipherEnvelope>& envelopes, std::uint64_t d);
std::vector<CipherEnvelope> envelopes_from_bytes(const Bytes& data);

// Birthday statistics for N users independently picking one line out of d
// (d = floor(sqrt(total_bits))): exact product form and the closed
// approximation 1 - (1 - N/(2d))^(N-1).
struct CollisionProb {
    double exact;
    double approx;
};
CollisionProb collision_prob_one(std::uint64_t users, std::uint64_t total_bits);
CollisionProb collision_prob_all(std::uint64_t users, std::uint64_t total_bits,
                                 unsigned line_count = 20);

std::uint64_t isqrt_u64(std::uint64_t v);

}  // namespace kbits
