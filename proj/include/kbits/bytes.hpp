#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace kbits {

using Bytes = std::vector<std::uint8_t>;

inline void put_u16be(Bytes& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

inline void put_u32be(Bytes& out, std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

inline void put_u64be(Bytes& out, std::uint64_t v) {
    for (int s = 56; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

inline std::uint16_t get_u16be(const std::uint8_t* p) {
    return static_cast<std::uint16_t>((p[0] << 8) | p[1]);
}

inline std::uint32_t get_u32be(const std::uint8_t* p) {
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) |
           (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
}

inline std::uint64_t get_u64be(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | p[i];
    return v;
}

// IEEE CRC32 (zlib polynomial)
std::uint32_t crc32_ieee(const std::uint8_t* data, std::size_t len);
inline std::uint32_t crc32_ieee(const Bytes& data) { return crc32_ieee(data.data(), data.size()); }

std::array<std::uint8_t, 32> sha256(const std::uint8_t* data, std::size_t len);
inline std::array<std::uint8_t, 32> sha256(const Bytes& data) { return sha256(data.data(), data.size()); }
inline std::array<std::uint8_t, 32> sha256(const std::string& s) {
    return sha256(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
}

std::string hex(const std::uint8_t* data, std::size_t len);
template <std::size_t N>
std::string hex(const std::array<std::uint8_t, N>& a) { return hex(a.data(), a.size()); }
inline std::string hex(const Bytes& b) { return hex(b.data(), b.size()); }

}  // namespace kbits
