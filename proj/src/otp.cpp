#include "kbits/otp.hpp"

#include "kbits/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace kbits {

BitVec KeyMatrix::line(std::uint64_t index) const {
    if (index < 1 || index > d) throw std::invalid_argument("KeyMatrix: line index out of [1, d]");
    const std::size_t start = static_cast<std::size_t>((index - 1) * d);
    return BitVec(bits.begin() + static_cast<std::ptrdiff_t>(start),
                  bits.begin() + static_cast<std::ptrdiff_t>(start + d));
}

void KeyMatrix::mark_consumed(std::uint64_t index) {
    if (index < 1 || index > d) throw std::invalid_argument("KeyMatrix: line index out of [1, d]");
    if (!consumed[static_cast<std::size_t>(index - 1)]) {
        consumed[static_cast<std::size_t>(index - 1)] = 1;
        ++consumed_count;
    }
}

std::uint64_t isqrt_u64(std::uint64_t v) {
    if (v == 0) return 0;
    std::uint64_t r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(v)));
    while (r > 0 && r > v / r) --r;                    // guard against double rounding
    while ((r + 1) <= v / (r + 1)) ++r;
    return r;
}

KeyMatrix build_key_matrix(const BitVec& key_bits) {
    if (key_bits.size() < 4) throw std::invalid_argument("build_key_matrix: need at least 4 bits");
    KeyMatrix m;
    m.d = isqrt_u64(key_bits.size());
    const std::size_t used = static_cast<std::size_t>(m.d * m.d);
    m.bits.assign(key_bits.begin(), key_bits.begin() + static_cast<std::ptrdiff_t>(used));
    m.remainder_bits = key_bits.size() - used;
    m.consumed.assign(static_cast<std::size_t>(m.d), 0);
    m.consumed_count = 0;
    return m;
}

CipherEnvelope encrypt_decentralized(KeyMatrix& matrix, const BitVec& message, Rng& rng,
                                     std::uint32_t line_count) {
    if (matrix.d == 0) throw std::invalid_argument("encrypt: empty matrix");
    if (message.empty() || message.size() > matrix.d)
        throw std::invalid_argument("encrypt: message must have 1..d bits");
    if (line_count == 0 || line_count > matrix.d)
        throw std::invalid_argument("encrypt: line_count must be in [1, d]");

    // distinct 1-based indices by rejection; line_count is tiny next to d
    std::set<std::uint32_t> chosen;
    while (chosen.size() < line_count)
        chosen.insert(static_cast<std::uint32_t>(rng.next_below(matrix.d) + 1));

    BitVec pad(static_cast<std::size_t>(matrix.d), 0);
    for (std::uint32_t idx : chosen) {
        const BitVec l = matrix.line(idx);
        for (std::size_t i = 0; i < pad.size(); ++i) pad[i] ^= l[i];
        matrix.mark_consumed(idx);
    }

    CipherEnvelope env;
    env.line_indices.assign(chosen.begin(), chosen.end());  // set iterates ascending
    env.message_bits = message.size();
    env.ciphertext = pad;
    for (std::size_t i = 0; i < message.size(); ++i) env.ciphertext[i] ^= message[i];
    return env;
}

BitVec decrypt_decentralized(const KeyMatrix& matrix, const CipherEnvelope& envelope) {
    if (envelope.ciphertext.size() != matrix.d)
        throw std::invalid_argument("decrypt: ciphertext length must equal d");
    if (envelope.message_bits > matrix.d)
        throw std::invalid_argument("decrypt: recorded length exceeds line size");
    BitVec plain = envelope.ciphertext;
    for (std::uint32_t idx : envelope.line_indices) {
        const BitVec l = matrix.line(idx);  // throws on unknown index
        for (std::size_t i = 0; i < plain.size(); ++i) plain[i] ^= l[i];
    }
    plain.resize(static_cast<std::size_t>(envelope.message_bits));
    return plain;
}

std::vector<CipherEnvelope> encrypt_message(KeyMatrix& matrix, const BitVec& message, Rng& rng,
                                            std::uint32_t line_count) {
    if (message.empty()) throw std::invalid_argument("encrypt_message: empty message");
    std::vector<CipherEnvelope> out;
    const std::size_t d = static_cast<std::size_t>(matrix.d);
    for (std::size_t off = 0; off < message.size(); off += d) {
        const std::size_t len = std::min(d, message.size() - off);
        const BitVec block(message.begin() + static_cast<std::ptrdiff_t>(off),
                           message.begin() + static_cast<std::ptrdiff_t>(off + len));
        out.push_back(encrypt_decentralized(matrix, block, rng, line_count));
    }
    return out;
}

BitVec decrypt_message(const KeyMatrix& matrix, const std::vector<CipherEnvelope>& envelopes) {
    BitVec out;
    for (const auto& env : envelopes) {
        const BitVec block = decrypt_decentralized(matrix, env);
        out.insert(out.end(), block.begin(), block.end());
    }
    return out;
}

namespace {
constexpr char kEnvMagic[4] = {'K', 'B', 'E', 'V'};
constexpr std::uint8_t kEnvVersion = 1;
}  // namespace

Bytes envelope_to_bytes(const CipherEnvelope& envelope, std::uint64_t d) {
    if (envelope.ciphertext.size() != d)
        throw std::invalid_argument("envelope_to_bytes: ciphertext length must equal d");
    if (d > 0xFFFFFFFFull) throw std::invalid_argument("envelope_to_bytes: d too large");
    if (envelope.line_indices.size() > 0xFFFF)
        throw std::invalid_argument("envelope_to_bytes: too many lines");
    if (!std::is_sorted(envelope.line_indices.begin(), envelope.line_indices.end()))
        throw std::invalid_argument("envelope_to_bytes: indices must be sorted");

    Bytes out;
    out.insert(out.end(), kEnvMagic, kEnvMagic + 4);
    out.push_back(kEnvVersion);
    put_u32be(out, static_cast<std::uint32_t>(d));
    put_u16be(out, static_cast<std::uint16_t>(envelope.line_indices.size()));
    for (std::uint32_t idx : envelope.line_indices) put_u32be(out, idx);
    put_u64be(out, envelope.message_bits);
    const auto packed = pack_msb_first(envelope.ciphertext);
    out.insert(out.end(), packed.begin(), packed.end());
    put_u32be(out, crc32_ieee(out));
    return out;
}

CipherEnvelope envelope_from_bytes(const std::uint8_t* data, std::size_t len,
                                   std::size_t& consumed) {
    const std::size_t min_len = 4 + 1 + 4 + 2 + 8 + 4;
    if (len < min_len) throw MalformedFrame("envelope: truncated header");
    if (!std::equal(kEnvMagic, kEnvMagic + 4, data)) throw MalformedFrame("envelope: bad magic");

    const std::uint32_t d = get_u32be(data + 5);
    const std::uint16_t count = get_u16be(data + 9);
    const std::size_t cipher_bytes = (static_cast<std::size_t>(d) + 7) / 8;
    const std::size_t total = 4 + 1 + 4 + 2 + 4u * count + 8 + cipher_bytes + 4;
    if (len < total) throw MalformedFrame("envelope: truncated body");
    const std::uint32_t stored_crc = get_u32be(data + total - 4);
    if (crc32_ieee(data, total - 4) != stored_crc) throw CrcMismatch("envelope: checksum failure");
    if (data[4] != kEnvVersion) throw UnsupportedVersion("envelope: unknown version");

    CipherEnvelope env;
    std::size_t off = 11;
    env.line_indices.reserve(count);
    for (std::uint16_t i = 0; i < count; ++i) {
        env.line_indices.push_back(get_u32be(data + off));
        off += 4;
    }
    if (!std::is_sorted(env.line_indices.begin(), env.line_indices.end()))
        throw MalformedFrame("envelope: indices not sorted");
    env.message_bits = get_u64be(data + off);
    off += 8;
    if (env.message_bits > d) throw MalformedFrame("envelope: length field exceeds d");
    const std::vector<std::uint8_t> packed(data + off, data + off + cipher_bytes);
    env.ciphertext = unpack_msb_first(packed, d);
    consumed = total;
    return env;
}

Bytes envelopes_to_bytes(const std::vector<CipherEnvelope>& envelopes, std::uint64_t d) {
    Bytes out;
    for (const auto& env : envelopes) {
        const Bytes one = envelope_to_bytes(env, d);
        out.insert(out.end(), one.begin(), one.end());
    }
    return out;
}

std::vector<CipherEnvelope> envelopes_from_bytes(const Bytes& data) {
    std::vector<CipherEnvelope> out;
    std::size_t off = 0;
    while (off < data.size()) {
        std::size_t used = 0;
        out.push_back(envelope_from_bytes(data.data() + off, data.size() - off, used));
        off += used;
    }
    return out;
}

CollisionProb collision_prob_one(std::uint64_t users, std::uint64_t total_bits) {
    if (users < 1) throw std::invalid_argument("collision_prob_one: need at least one user");
    const std::uint64_t d = isqrt_u64(total_bits);
    if (d < 1) throw std::invalid_argument("collision_prob_one: matrix has no lines");
    if (users > d) throw std::invalid_argument("collision_prob_one: more users than lines");

    // exact birthday 1 - prod_{i=1}^{N-1}(1 - i/d), accumulated as
    // q <- q + x - q*x which keeps q exact for the small-N cases
    double q = 0.0;
    const double dd = static_cast<double>(d);
    for (std::uint64_t i = 1; i < users; ++i) {
        const double x = static_cast<double>(i) / dd;
        q = q + x - q * x;
    }

    CollisionProb p;
    p.exact = q;
    p.approx = 1.0 - std::pow(1.0 - static_cast<double>(users) / (2.0 * dd),
                              static_cast<double>(users - 1));
    return p;
}

CollisionProb collision_prob_all(std::uint64_t users, std::uint64_t total_bits,
                                 unsigned line_count) {
    const CollisionProb one = collision_prob_one(users, total_bits);
    CollisionProb all;
    all.exact = std::pow(one.exact, static_cast<double>(line_count));
    all.approx = std::pow(one.approx, static_cast<double>(line_count));
    return all;
}

}  // namespace kbits
