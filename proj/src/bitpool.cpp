#include "kbits/bitpool.hpp"

#include "kbits/bytes.hpp"
#include "kbits/errors.hpp"
#include "kbits/rng.hpp"
#include "kbits/toeplitz.hpp"

#include <fstream>
#include <stdexcept>

namespace kbits {

void BitPoolState::validate() const {
    if (a == 0) throw std::invalid_argument("BitPoolState: a must be positive");
    const std::uint64_t want = static_cast<std::uint64_t>(mary_cfg.bits_per_basis()) * a;
    if (basis_bits.size() != want)
        throw std::invalid_argument("BitPoolState: basis_bits must hold exactly m*a bits");
    for (auto b : basis_bits)
        if (b > 1) throw std::invalid_argument("BitPoolState: non-binary basis bit");
}

BitPoolState make_pool(const MaryConfig& cfg, std::uint64_t a, const BitVec& basis_bits) {
    BitPoolState st;
    st.mary_cfg = cfg;
    st.a = a;
    st.basis_bits = basis_bits;
    st.validate();
    return st;
}

std::vector<BasisIndex> next_bases(const BitPoolState& state) {
    state.validate();
    const unsigned m = state.mary_cfg.bits_per_basis();
    std::vector<BasisIndex> out;
    out.reserve(state.a);
    for (std::uint64_t i = 0; i < state.a; ++i) {
        BasisIndex k = 0;
        for (unsigned b = 0; b < m; ++b)          // first bit of the block is the LSB
            k |= static_cast<BasisIndex>(state.basis_bits[i * m + b] & 1u) << b;
        out.push_back(k);
    }
    return out;
}

BitVec shuffle(const BitVec& bits, const std::array<std::uint8_t, 16>& seed) {
    BitVec out = bits;
    Rng rng(seed);
    for (std::size_t i = out.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(out[i - 1], out[j]);
    }
    return out;
}

RoundOutput distill(const BitVec& shared_fresh, BitPoolState& state, const RoundParams& params,
                    const AttackStats& stats) {
    state.validate();
    if (shared_fresh.size() != state.a)
        throw std::invalid_argument("distill: fresh bits must have length a");

    const std::uint64_t a = state.a;
    const std::uint64_t ma = state.basis_bits.size();
    const std::uint64_t t =
        params.t_override ? *params.t_override : leaked_bits(a, stats.p_success);
    if (a <= t + params.lambda)
        throw InsufficientBits("distill: a <= t + lambda, nothing would remain");

    const std::uint64_t n = a + ma;
    const std::uint64_t r = n - t - params.lambda;
    const std::uint64_t z = a - t - params.lambda;

    BitVec pool;
    pool.reserve(n);
    pool.insert(pool.end(), shared_fresh.begin(), shared_fresh.end());
    pool.insert(pool.end(), state.basis_bits.begin(), state.basis_bits.end());

    BitVec kept;
    if (params.pa_mode == PaMode::permute) {
        BitVec shuffled = shuffle(pool, params.shuffle_seed);
        kept.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(r));
    } else {
        kept = toeplitz_hash(pool, static_cast<std::size_t>(r), params.shuffle_seed);
    }

    RoundOutput out;
    out.z_bits.assign(kept.begin(), kept.begin() + static_cast<std::ptrdiff_t>(z));
    out.new_basis_bits.assign(kept.begin() + static_cast<std::ptrdiff_t>(z), kept.end());
    out.budget.n = n;
    out.budget.t = t;
    out.budget.lambda = params.lambda;
    out.budget.r = r;
    out.budget.z = z;
    out.budget.mutual_info_bound_log2 =
        pa_leak_bound(static_cast<double>(params.lambda)).log2_bits;
    out.budget.fraction_left = fraction_left(n, t, params.lambda);

    // commit only after everything above succeeded
    state.basis_bits = out.new_basis_bits;
    state.round_index += 1;
    return out;
}

std::vector<WireCode> encode_round(const BitPoolState& state, const BitVec& fresh_bits,
                                   CloakNoiseSource& noise) {
    if (fresh_bits.size() != state.a)
        throw std::invalid_argument("encode_round: fresh bits must have length a");
    const auto bases = next_bases(state);
    std::vector<WireCode> samples;
    samples.reserve(fresh_bits.size());
    for (std::size_t i = 0; i < fresh_bits.size(); ++i)
        samples.push_back(
            encode_wire_sample(fresh_bits[i], bases[i], noise.next(), state.mary_cfg));
    return samples;
}

BitVec decode_round(const BitPoolState& state, const std::vector<WireCode>& samples) {
    if (samples.size() != state.a)
        throw std::invalid_argument("decode_round: sample count must equal a");
    const auto bases = next_bases(state);
    BitVec bits;
    bits.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        bits.push_back(static_cast<std::uint8_t>(
            decode_sample(wire_to_adc(samples[i]), bases[i], state.mary_cfg)));
    return bits;
}

TxRound run_round_tx(BitPoolState& state, const BitVec& fresh_bits, CloakNoiseSource& noise,
                     const RoundParams& params, const AttackStats& stats) {
    TxRound round;
    round.samples = encode_round(state, fresh_bits, noise);
    round.output = distill(fresh_bits, state, params, stats);
    return round;
}

RoundOutput run_round_rx(BitPoolState& state, const std::vector<WireCode>& samples,
                         const RoundParams& params, const AttackStats& stats) {
    const BitVec decoded = decode_round(state, samples);
    return distill(decoded, state, params, stats);
}

namespace {
constexpr char kPoolMagic[4] = {'K', 'B', 'P', 'S'};
constexpr std::uint8_t kPoolVersion = 1;
}  // namespace

void save_pool(const BitPoolState& state, const std::string& path) {
    state.validate();
    Bytes out;
    out.insert(out.end(), kPoolMagic, kPoolMagic + 4);
    out.push_back(kPoolVersion);
    out.push_back(static_cast<std::uint8_t>(state.mary_cfg.bits_per_basis()));
    put_u64be(out, state.a);
    put_u64be(out, state.round_index);
    const auto packed = pack_msb_first(state.basis_bits);
    out.insert(out.end(), packed.begin(), packed.end());
    put_u32be(out, crc32_ieee(out));
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("save_pool: cannot open " + path);
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f) throw std::runtime_error("save_pool: short write to " + path);
}

BitPoolState load_pool(const std::string& path, double b_max) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("load_pool: cannot open " + path);
    Bytes data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    if (data.size() < 4 + 1 + 1 + 8 + 8 + 4) throw MalformedFrame("load_pool: truncated file");
    if (!std::equal(kPoolMagic, kPoolMagic + 4, data.begin()))
        throw MalformedFrame("load_pool: bad magic");
    const std::uint32_t stored_crc = get_u32be(data.data() + data.size() - 4);
    if (crc32_ieee(data.data(), data.size() - 4) != stored_crc)
        throw CrcMismatch("load_pool: checksum failure");
    if (data[4] != kPoolVersion) throw UnsupportedVersion("load_pool: unknown version");

    const unsigned m = data[5];
    if (m < 2 || m > 15) throw MalformedFrame("load_pool: basis width out of range");
    const std::uint64_t a = get_u64be(data.data() + 6);
    const std::uint64_t round_index = get_u64be(data.data() + 14);
    const std::uint64_t bit_count = static_cast<std::uint64_t>(m) * a;
    const std::uint64_t byte_count = (bit_count + 7) / 8;
    if (data.size() != 22 + byte_count + 4) throw MalformedFrame("load_pool: length mismatch");

    const std::vector<std::uint8_t> packed(data.begin() + 22,
                                           data.begin() + 22 + static_cast<std::ptrdiff_t>(byte_count));
    BitPoolState st;
    st.mary_cfg = MaryConfig::make(std::uint32_t{1} << m, b_max);
    st.a = a;
    st.round_index = round_index;
    st.basis_bits = unpack_msb_first(packed, static_cast<std::size_t>(bit_count));
    st.validate();
    return st;
}

void append_keystore(const std::string& path, const BitVec& z_bits) {
    const auto packed = pack_msb_first(z_bits);
    std::ofstream f(path, std::ios::binary | std::ios::app);
    if (!f) throw std::runtime_error("append_keystore: cannot open " + path);
    f.write(reinterpret_cast<const char*>(packed.data()),
            static_cast<std::streamsize>(packed.size()));
    if (!f) throw std::runtime_error("append_keystore: short write to " + path);
}

BitVec read_keystore(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_keystore: cannot open " + path);
    std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
    return unpack_msb_first(data, data.size() * 8);
}

}  // namespace kbits
