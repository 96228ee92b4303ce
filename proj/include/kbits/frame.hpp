#pragma once

#include "kbits/bitpool.hpp"
#include "kbits/bytes.hpp"
#include "kbits/codec.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace kbits {

// Wire framing: "KBTS" | version u8 | kind u8 | round u32 | seq u32 |
// payload_len u32 | payload | crc32 u32, all integers big-endian, CRC over
// every preceding byte.  An empty-payload frame is exactly 22 bytes.

enum class FrameKind : std::uint8_t {
    hello = 1,      // canonical config digest (32 bytes)
    batch = 2,      // u32 count + count u16 wire codes
    pa_params = 3,  // a u64 | t u64 | lambda u64 | mode u8 | seed 16B
    ack = 4,        // empty, or a 32-byte distilled-key digest
    error = 5,      // human-readable reason
};

struct Frame {
    std::uint8_t version = 1;
    FrameKind kind = FrameKind::hello;
    std::uint32_t round = 0;
    std::uint32_t seq = 0;
    Bytes payload;

    bool operator==(const Frame&) const = default;
};

inline constexpr std::size_t kFrameHeaderSize = 18;  // magic..payload_len
inline constexpr std::size_t kFrameOverhead = 22;    // header + crc
inline constexpr std::size_t kMaxPayload = 4u << 20;
inline constexpr std::size_t kBatchChunk = 16384;  // wire codes per BATCH frame

Bytes encode_frame(const Frame& frame);

// Validation order: structure (magic, sizes, length field) first, then CRC,
// then version, then kind.  Any single corrupted byte therefore surfaces as
// MalformedFrame or CrcMismatch; UnsupportedVersion is reserved for
// well-formed frames from a future protocol.
Frame decode_frame(const Bytes& bytes);
Frame decode_frame(const std::uint8_t* data, std::size_t len);

// payload builders / parsers
Bytes batch_payload(const std::vector<WireCode>& codes, std::size_t offset, std::size_t count);
std::vector<WireCode> parse_batch_payload(const Bytes& payload);

struct PaParamsPayload {
    std::uint64_t a = 0;
    std::uint64_t t = 0;
    std::uint64_t lambda = 0;
    PaMode mode = PaMode::permute;
    std::array<std::uint8_t, 16> shuffle_seed{};
};

Bytes build_pa_params(const PaParamsPayload& p);
PaParamsPayload parse_pa_params(const Bytes& payload);

}  // namespace kbits
