#include "kbits/frame.hpp"

#include "kbits/errors.hpp"

#include <algorithm>

namespace kbits {

namespace {
constexpr char kMagic[4] = {'K', 'B', 'T', 'S'};
constexpr std::uint8_t kVersion = 1;
}  // namespace

Bytes encode_frame(const Frame& frame) {
    if (frame.payload.size() > kMaxPayload)
        throw std::invalid_argument("encode_frame: payload exceeds cap");
    Bytes out;
    out.reserve(kFrameOverhead + frame.payload.size());
    out.insert(out.end(), kMagic, kMagic + 4);
    out.push_back(frame.version);
    out.push_back(static_cast<std::uint8_t>(frame.kind));
    put_u32be(out, frame.round);
    put_u32be(out, frame.seq);
    put_u32be(out, static_cast<std::uint32_t>(frame.payload.size()));
    out.insert(out.end(), frame.payload.begin(), frame.payload.end());
    put_u32be(out, crc32_ieee(out));
    return out;
}

Frame decode_frame(const std::uint8_t* data, std::size_t len) {
    if (len < kFrameOverhead) throw MalformedFrame("frame: shorter than minimum");
    if (!std::equal(kMagic, kMagic + 4, data)) throw MalformedFrame("frame: bad magic");
    const std::uint32_t payload_len = get_u32be(data + 14);
    if (payload_len > kMaxPayload) throw MalformedFrame("frame: payload length exceeds cap");
    if (len != kFrameOverhead + payload_len) throw MalformedFrame("frame: length field mismatch");

    const std::uint32_t stored_crc = get_u32be(data + len - 4);
    if (crc32_ieee(data, len - 4) != stored_crc) throw CrcMismatch("frame: checksum failure");

    if (data[4] != kVersion) throw UnsupportedVersion("frame: unknown version");
    const std::uint8_t kind = data[5];
    if (kind < 1 || kind > 5) throw MalformedFrame("frame: unknown kind");

    Frame f;
    f.version = data[4];
    f.kind = static_cast<FrameKind>(kind);
    f.round = get_u32be(data + 6);
    f.seq = get_u32be(data + 10);
    f.payload.assign(data + kFrameHeaderSize, data + kFrameHeaderSize + payload_len);
    return f;
}

Frame decode_frame(const Bytes& bytes) { return decode_frame(bytes.data(), bytes.size()); }

Bytes batch_payload(const std::vector<WireCode>& codes, std::size_t offset, std::size_t count) {
    if (offset + count > codes.size())
        throw std::invalid_argument("batch_payload: range out of bounds");
    if (count == 0 || count > kBatchChunk)
        throw std::invalid_argument("batch_payload: count out of range");
    Bytes out;
    out.reserve(4 + 2 * count);
    put_u32be(out, static_cast<std::uint32_t>(count));
    for (std::size_t i = 0; i < count; ++i) put_u16be(out, codes[offset + i]);
    return out;
}

std::vector<WireCode> parse_batch_payload(const Bytes& payload) {
    if (payload.size() < 4) throw MalformedFrame("batch: missing count");
    const std::uint32_t count = get_u32be(payload.data());
    if (count == 0 || count > kBatchChunk) throw MalformedFrame("batch: count out of range");
    if (payload.size() != 4 + 2ull * count) throw MalformedFrame("batch: size mismatch");
    std::vector<WireCode> codes;
    codes.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i)
        codes.push_back(get_u16be(payload.data() + 4 + 2ull * i));
    return codes;
}

Bytes build_pa_params(const PaParamsPayload& p) {
    Bytes out;
    out.reserve(41);
    put_u64be(out, p.a);
    put_u64be(out, p.t);
    put_u64be(out, p.lambda);
    out.push_back(static_cast<std::uint8_t>(p.mode));
    out.insert(out.end(), p.shuffle_seed.begin(), p.shuffle_seed.end());
    return out;
}

PaParamsPayload parse_pa_params(const Bytes& payload) {
    if (payload.size() != 41) throw MalformedFrame("pa_params: payload must be 41 bytes");
    PaParamsPayload p;
    p.a = get_u64be(payload.data());
    p.t = get_u64be(payload.data() + 8);
    p.lambda = get_u64be(payload.data() + 16);
    const std::uint8_t mode = payload[24];
    if (mode > 1) throw MalformedFrame("pa_params: unknown mode");
    p.mode = static_cast<PaMode>(mode);
    std::copy(payload.begin() + 25, payload.end(), p.shuffle_seed.begin());
    return p;
}

}  // namespace kbits
