#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace kbits {

// One bit per element, values restricted to 0/1.  Chosen over a packed
// representation because shuffling and slicing dominate the hot paths.
using BitVec = std::vector<std::uint8_t>;

inline BitVec xor_bits(const BitVec& x, const BitVec& y) {
    if (x.size() != y.size()) throw std::invalid_argument("xor_bits: length mismatch");
    BitVec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] ^ y[i];
    return out;
}

inline std::size_t popcount_bits(const BitVec& x) {
    std::size_t n = 0;
    for (auto b : x) n += b;
    return n;
}

// Most significant bit first within each byte; final partial byte zero-padded.
inline std::vector<std::uint8_t> pack_msb_first(const BitVec& bits) {
    std::vector<std::uint8_t> out((bits.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) out[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
    return out;
}

inline BitVec unpack_msb_first(const std::vector<std::uint8_t>& bytes, std::size_t bit_count) {
    if (bit_count > bytes.size() * 8) throw std::invalid_argument("unpack_msb_first: short buffer");
    BitVec out(bit_count);
    for (std::size_t i = 0; i < bit_count; ++i)
        out[i] = (bytes[i / 8] >> (7 - i % 8)) & 1u;
    return out;
}

}  // namespace kbits
