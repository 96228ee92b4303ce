#pragma once

#include "kbits/bits.hpp"

#include <array>
#include <cstdint>

namespace kbits {

// GF(2) Toeplitz universal hash, the compression-style distillation mode:
// y = T·x mod 2 with T[i][j] = s[i - j + n - 1], T is r x n, and s is the
// diagonal seed string of length n + r - 1.

// seed bits expanded from a public 128-bit seed
BitVec toeplitz_seed_bits(std::size_t count, const std::array<std::uint8_t, 16>& seed);

// FFT convolution: y_i = parity(conv(s, x)[i + n - 1])
BitVec toeplitz_hash(const BitVec& x, std::size_t r, const BitVec& seed_bits);

inline BitVec toeplitz_hash(const BitVec& x, std::size_t r,
                            const std::array<std::uint8_t, 16>& seed) {
    return toeplitz_hash(x, r, toeplitz_seed_bits(x.size() + r - 1, seed));
}

// direct O(n*r) evaluation, kept as the cross-check reference
BitVec toeplitz_hash_naive(const BitVec& x, std::size_t r, const BitVec& seed_bits);

}  // namespace kbits
