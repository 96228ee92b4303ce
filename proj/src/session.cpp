#include "kbits/session.hpp"

#include "kbits/bytes.hpp"
#include "kbits/errors.hpp"
#include "kbits/rng.hpp"
#include "kbits/security.hpp"
#include "kbits/toeplitz.hpp"

#include <algorithm>
#include <cstring>
#include <memory>
#include <string>

namespace kbits {

namespace {

Bytes digest_bytes(const std::array<std::uint8_t, 32>& d) { return Bytes(d.begin(), d.end()); }

void send_error(Transport& t, std::uint32_t round, std::uint32_t seq, const std::string& why) {
    Frame f;
    f.kind = FrameKind::error;
    f.round = round;
    f.seq = seq;
    f.payload.assign(why.begin(), why.end());
    try {
        write_frame(t, f);
    } catch (...) {
        // the peer may already be gone; the local exception is what matters
    }
}

[[noreturn]] void raise_peer_error(const Frame& f) {
    const std::string why(f.payload.begin(), f.payload.end());
    if (why.rfind("transcript", 0) == 0) throw TranscriptMismatch("peer: " + why);
    if (why.rfind("config", 0) == 0) throw ConfigMismatch("peer: " + why);
    throw ProtocolError("peer error: " + why);
}

Frame expect_frame(Transport& t, std::chrono::milliseconds timeout, FrameKind kind,
                   std::uint32_t round, std::uint32_t seq) {
    const Frame f = read_frame(t, timeout);
    if (f.kind == FrameKind::error) raise_peer_error(f);
    if (f.kind != kind) throw ProtocolError("unexpected frame kind");
    if (f.round != round) throw ProtocolError("unexpected round number");
    if (f.seq != seq) throw ProtocolError("unexpected sequence number");
    return f;
}

}  // namespace

std::array<std::uint8_t, 32> config_digest(const MaryConfig& cfg, std::uint64_t a) {
    Bytes canon;
    canon.push_back('K');
    canon.push_back('B');
    canon.push_back('C');
    canon.push_back('F');
    canon.push_back(1);  // digest schema version
    put_u32be(canon, cfg.levels);
    std::uint64_t b_bits;
    static_assert(sizeof b_bits == sizeof cfg.b_max);
    std::memcpy(&b_bits, &cfg.b_max, sizeof b_bits);
    put_u64be(canon, b_bits);
    put_u64be(canon, a);
    return sha256(canon);
}

std::array<std::uint8_t, 32> z_digest(const BitVec& z_bits) {
    Bytes buf;
    put_u64be(buf, z_bits.size());
    const auto packed = pack_msb_first(z_bits);
    buf.insert(buf.end(), packed.begin(), packed.end());
    return sha256(buf);
}

RoundResult run_tx_round(Transport& t, BitPoolState& pool, const BitVec& fresh_bits,
                         const SessionOptions& opt) {
    pool.validate();
    if (fresh_bits.size() != pool.a)
        throw std::invalid_argument("run_tx_round: fresh bits must have length a");
    const std::uint32_t round = static_cast<std::uint32_t>(pool.round_index + 1);
    std::uint32_t seq = 0;

    // HELLO exchange: both directions carry the canonical geometry digest
    const auto digest = config_digest(pool.mary_cfg, pool.a);
    Frame hello;
    hello.kind = FrameKind::hello;
    hello.round = round;
    hello.seq = seq++;
    hello.payload = digest_bytes(digest);
    write_frame(t, hello);
    const Frame peer_hello = expect_frame(t, opt.timeout, FrameKind::hello, round, 0);
    if (peer_hello.payload != hello.payload) {
        send_error(t, round, seq, "config digest mismatch");
        throw ConfigMismatch("tx: peer configuration digest differs");
    }

    // cloaked samples; sigma 0 means an uncloaked line
    std::unique_ptr<CloakNoiseSource> noise;
    if (opt.sigma_v > 0.0)
        noise = std::make_unique<GridGaussianNoise>(opt.sigma_v, pool.mary_cfg,
                                                    opt.noise_seed + round);
    else
        noise = std::make_unique<ZeroNoise>();
    const std::vector<WireCode> samples = encode_round(pool, fresh_bits, *noise);
    for (std::size_t off = 0; off < samples.size(); off += kBatchChunk) {
        const std::size_t count = std::min(kBatchChunk, samples.size() - off);
        Frame batch;
        batch.kind = FrameKind::batch;
        batch.round = round;
        batch.seq = seq++;
        batch.payload = batch_payload(samples, off, count);
        write_frame(t, batch);
    }

    // public distillation parameters; t is computed here and carried to RX
    const double p_success =
        opt.p_success_override ? *opt.p_success_override
        : opt.sigma_v > 0.0    ? attack_stats(opt.sigma_v, pool.mary_cfg).p_success
                               : 1.0;  // an uncloaked line leaks everything
    AttackStats stats{};
    stats.p_success = p_success;
    RoundParams params;
    params.lambda = opt.lambda + opt.digest_surcharge;
    params.shuffle_seed = opt.shuffle_seed;
    params.t_override =
        opt.t_override ? *opt.t_override : leaked_bits(pool.a, p_success);
    params.pa_mode = opt.pa_mode;

    PaParamsPayload pa;
    pa.a = pool.a;
    pa.t = *params.t_override;
    pa.lambda = params.lambda;
    pa.mode = params.pa_mode;
    pa.shuffle_seed = params.shuffle_seed;
    Frame pa_frame;
    pa_frame.kind = FrameKind::pa_params;
    pa_frame.round = round;
    pa_frame.seq = seq++;
    pa_frame.payload = build_pa_params(pa);
    write_frame(t, pa_frame);

    // distill on a scratch copy; commit only after the peer confirms
    BitPoolState scratch = pool;
    RoundResult result;
    result.output = distill(fresh_bits, scratch, params, stats);
    result.round = round;

    Frame confirm;
    confirm.kind = FrameKind::ack;
    confirm.round = round;
    confirm.seq = seq++;
    confirm.payload = digest_bytes(z_digest(result.output.z_bits));
    write_frame(t, confirm);

    const Frame peer_ack = expect_frame(t, opt.timeout, FrameKind::ack, round, 1);
    if (!peer_ack.payload.empty() && peer_ack.payload != confirm.payload)
        throw TranscriptMismatch("tx: peer acknowledged a different key digest");

    pool = std::move(scratch);
    return result;
}

RoundResult run_rx_round(Transport& t, BitPoolState& pool, const SessionOptions& opt) {
    pool.validate();
    const std::uint32_t round = static_cast<std::uint32_t>(pool.round_index + 1);
    std::uint32_t rx_seq = 0;

    const auto digest = config_digest(pool.mary_cfg, pool.a);
    const Frame peer_hello = expect_frame(t, opt.timeout, FrameKind::hello, round, 0);
    Frame hello;
    hello.kind = FrameKind::hello;
    hello.round = round;
    hello.seq = rx_seq++;
    hello.payload = digest_bytes(digest);
    if (peer_hello.payload != hello.payload) {
        send_error(t, round, rx_seq, "config digest mismatch");
        throw ConfigMismatch("rx: peer configuration digest differs");
    }
    write_frame(t, hello);

    // collect exactly a wire codes
    std::vector<WireCode> samples;
    samples.reserve(pool.a);
    std::uint32_t expect_seq = 1;
    while (samples.size() < pool.a) {
        const Frame f = read_frame(t, opt.timeout);
        if (f.kind == FrameKind::error) raise_peer_error(f);
        if (f.kind != FrameKind::batch) throw ProtocolError("rx: expected a batch frame");
        if (f.round != round || f.seq != expect_seq++)
            throw ProtocolError("rx: batch out of order");
        const auto codes = parse_batch_payload(f.payload);
        if (samples.size() + codes.size() > pool.a)
            throw ProtocolError("rx: more samples than announced");
        samples.insert(samples.end(), codes.begin(), codes.end());
    }

    const Frame pa_frame = expect_frame(t, opt.timeout, FrameKind::pa_params, round, expect_seq++);
    const PaParamsPayload pa = parse_pa_params(pa_frame.payload);
    if (pa.a != pool.a) {
        send_error(t, round, rx_seq, "config a mismatch");
        throw ConfigMismatch("rx: peer distills a different block size");
    }

    RoundParams params;
    params.lambda = pa.lambda;
    params.shuffle_seed = pa.shuffle_seed;
    params.t_override = pa.t;
    params.pa_mode = pa.mode;
    AttackStats stats{};  // t arrives explicitly, the analytic stats are unused

    BitPoolState scratch = pool;
    const BitVec decoded = decode_round(pool, samples);
    RoundResult result;
    result.output = distill(decoded, scratch, params, stats);
    result.round = round;

    const Frame peer_digest = expect_frame(t, opt.timeout, FrameKind::ack, round, expect_seq++);
    const Bytes mine = digest_bytes(z_digest(result.output.z_bits));
    if (peer_digest.payload != mine) {
        send_error(t, round, rx_seq, "transcript digest mismatch");
        throw TranscriptMismatch("rx: distilled keys differ, round aborted");
    }

    Frame ack;
    ack.kind = FrameKind::ack;
    ack.round = round;
    ack.seq = rx_seq++;
    ack.payload = mine;
    write_frame(t, ack);

    pool = std::move(scratch);
    return result;
}

TapReport run_tap(const Bytes& transcript, const MaryConfig& cfg) {
    TapReport report;
    std::size_t off = 0;
    std::uint32_t last_round = 0;
    while (off < transcript.size()) {
        if (transcript.size() - off < kFrameOverhead)
            throw MalformedFrame("tap: trailing bytes are not a frame");
        const std::uint32_t payload_len = get_u32be(transcript.data() + off + 14);
        if (payload_len > kMaxPayload) throw MalformedFrame("tap: payload length exceeds cap");
        const std::size_t total = kFrameOverhead + payload_len;
        if (transcript.size() - off < total) throw MalformedFrame("tap: truncated frame");
        const Frame f = decode_frame(transcript.data() + off, total);
        off += total;

        if (f.round != last_round) {
            last_round = f.round;
            ++report.rounds_seen;
        }
        if (f.kind == FrameKind::batch) {
            for (const WireCode w : parse_batch_payload(f.payload)) {
                report.samples.push_back(w);
                report.bit_guesses.push_back(
                    static_cast<std::uint8_t>(ml_attack_guess(w, cfg)));
            }
        } else if (f.kind == FrameKind::pa_params) {
            report.pa = parse_pa_params(f.payload);
        }
    }
    return report;
}

double agreement(const BitVec& guesses, const BitVec& truth) {
    if (guesses.size() != truth.size() || guesses.empty())
        throw std::invalid_argument("agreement: length mismatch");
    std::size_t same = 0;
    for (std::size_t i = 0; i < guesses.size(); ++i)
        if (guesses[i] == truth[i]) ++same;
    return static_cast<double>(same) / static_cast<double>(guesses.size());
}

BitVec tap_reconstruct_z(const TapReport& report, const MaryConfig& cfg,
                         std::uint64_t coin_seed) {
    if (!report.pa) throw ProtocolError("tap: transcript carried no distillation parameters");
    const PaParamsPayload& pa = *report.pa;
    if (report.samples.size() < pa.a) throw ProtocolError("tap: transcript is missing samples");
    if (pa.a <= pa.t + pa.lambda) throw ProtocolError("tap: parameters leave no key");

    const std::uint64_t ma = static_cast<std::uint64_t>(cfg.bits_per_basis()) * pa.a;
    const std::uint64_t n = pa.a + ma;
    const std::uint64_t r = n - pa.t - pa.lambda;
    const std::uint64_t z = pa.a - pa.t - pa.lambda;

    BitVec guess;
    guess.reserve(n);
    guess.insert(guess.end(), report.bit_guesses.begin(),
                 report.bit_guesses.begin() + static_cast<std::ptrdiff_t>(pa.a));
    Rng coins(coin_seed);
    for (std::uint64_t i = 0; i < ma; ++i)
        guess.push_back(static_cast<std::uint8_t>(coins.next_bit()));

    BitVec kept;
    if (pa.mode == PaMode::permute) {
        const BitVec shuffled = shuffle(guess, pa.shuffle_seed);
        kept.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(r));
    } else {
        kept = toeplitz_hash(guess, static_cast<std::size_t>(r), pa.shuffle_seed);
    }
    kept.resize(static_cast<std::size_t>(z));
    return kept;
}

}  // namespace kbits
