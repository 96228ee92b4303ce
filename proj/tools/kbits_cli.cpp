// Operator CLI: key generation, analytic CSV grids, in-process round
// simulation, networked TX/RX stations, transcript taps, envelope
// encryption, and collision tables.
//
// Exit codes: 0 success, 2 configuration error, 3 protocol error,
// 4 verification mismatch.

#include "CLI11.hpp"

#include "kbits/bitpool.hpp"
#include "kbits/channel.hpp"
#include "kbits/codec.hpp"
#include "kbits/entropy.hpp"
#include "kbits/errors.hpp"
#include "kbits/otp.hpp"
#include "kbits/rng.hpp"
#include "kbits/security.hpp"
#include "kbits/session.hpp"

#include <cinttypes>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace kbits;

namespace {

// ---------- shared configuration ----------

struct RunConfig {
    // channel
    double power = 662e-6;
    double wavelength = 1550e-9;
    double gain = 0.0;  // 0 = solve for mean voltage b_max
    double efficiency = 0.5;
    double resistance = 50.0;
    double capacitance = 1e-12;
    double temperature = 300.0;
    // coding
    std::uint32_t levels = 1024;
    double b_max = 10.0;
    // round
    std::uint64_t a = 1000000;
    std::uint64_t lambda = 10000;
    std::uint64_t surcharge = 256;
    std::string pa_mode = "permute";
    std::int64_t t_override = -1;  // < 0: analytic estimate
    double sigma = 0.0;            // 0 = derive from the channel, < 0 = cloak off
    // seeds
    std::uint64_t seed = 1;
    std::string shuffle_seed_hex;  // 32 hex chars; empty = derive from seed
    // net
    std::string host = "127.0.0.1";
    std::uint16_t port = 9440;
    std::uint64_t timeout_ms = 30000;

    ChannelParams channel() const {
        ChannelParams p;
        p.optical_power = power;
        p.laser_wavelength = wavelength;
        p.gain = gain > 0.0 ? gain : 1.0;
        p.detector_efficiency = efficiency;
        p.resistance = resistance;
        p.capacitance = capacitance;
        p.temperature = temperature;
        if (gain <= 0.0) p.gain = gain_for_mean_voltage(p, b_max);
        p.validate();
        return p;
    }
    MaryConfig mary() const { return MaryConfig::make(levels, b_max); }
    double resolved_sigma() const {
        if (sigma < 0.0) return 0.0;  // cloak disabled on purpose
        return sigma > 0.0 ? sigma : sigma_v(channel());
    }

    PaMode mode() const {
        if (pa_mode == "permute") return PaMode::permute;
        if (pa_mode == "toeplitz") return PaMode::toeplitz;
        throw std::invalid_argument("pa_mode must be 'permute' or 'toeplitz'");
    }

    std::array<std::uint8_t, 16> shuffle_seed() const {
        std::array<std::uint8_t, 16> out{};
        if (shuffle_seed_hex.empty()) {
            Rng rng(seed ^ 0x73687566736565ULL);  // independent lane off the master seed
            for (int half = 0; half < 2; ++half) {
                const std::uint64_t w = rng.next_u64();
                for (int i = 0; i < 8; ++i)
                    out[static_cast<std::size_t>(half * 8 + i)] =
                        static_cast<std::uint8_t>(w >> (56 - 8 * i));
            }
            return out;
        }
        if (shuffle_seed_hex.size() != 32)
            throw std::invalid_argument("shuffle-seed must be exactly 32 hex characters");
        for (std::size_t i = 0; i < 16; ++i)
            out[i] = static_cast<std::uint8_t>(
                std::stoul(shuffle_seed_hex.substr(2 * i, 2), nullptr, 16));
        return out;
    }

    SessionOptions session_options() const {
        SessionOptions opt;
        opt.sigma_v = resolved_sigma();
        opt.lambda = lambda;
        opt.digest_surcharge = surcharge;
        opt.pa_mode = mode();
        opt.shuffle_seed = shuffle_seed();
        if (t_override >= 0) opt.t_override = static_cast<std::uint64_t>(t_override);
        opt.noise_seed = seed + 1000;
        opt.timeout = std::chrono::milliseconds(timeout_ms);
        return opt;
    }
};

BitVec random_bits(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    BitVec v(n);
    for (auto& b : v) b = static_cast<std::uint8_t>(rng.next_bit());
    return v;
}

// the two stations must start from identical provisioned pools; the
// simulator derives them from the shared master seed
BitPoolState provisioned_pool(const RunConfig& cfg) {
    const auto mary = cfg.mary();
    return make_pool(mary, cfg.a, random_bits(mary.bits_per_basis() * cfg.a, cfg.seed + 31337));
}

BitVec fresh_bits_for_round(const RunConfig& cfg, std::uint64_t round) {
    return random_bits(cfg.a, cfg.seed + 7700000 + round);
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Bytes read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::invalid_argument("cannot open " + path);
    return Bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const Bytes& data) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::invalid_argument("cannot open " + path + " for writing");
    f.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!f) throw std::runtime_error("short write to " + path);
}

std::ofstream open_csv(const std::string& dir, const std::string& name, const char* header) {
    std::ofstream f(dir + "/" + name, std::ios::trunc);
    if (!f) throw std::invalid_argument("cannot open " + dir + "/" + name + " for writing");
    f << header << "\n";
    return f;
}

void print_budget(const RoundResult& res, const RunConfig& cfg) {
    const auto& b = res.output.budget;
    std::printf("round %u\n", res.round);
    std::printf("  n         %" PRIu64 "\n", b.n);
    std::printf("  t         %" PRIu64 "\n", b.t);
    std::printf("  lambda    %" PRIu64 "  (includes digest surcharge %" PRIu64 ")\n", b.lambda,
                cfg.surcharge);
    std::printf("  r         %" PRIu64 " = n - t - lambda\n", b.r);
    std::printf("  z         %" PRIu64 " = %" PRIu64 " - %" PRIu64 " - %" PRIu64 "\n", b.z,
                cfg.a, b.t, b.lambda);
    std::printf("  fraction_left  %s\n", num(b.fraction_left).c_str());
    std::printf("  log2_residual_info  %s\n", num(b.mutual_info_bound_log2).c_str());
    std::printf("  z_digest  %s\n", hex(z_digest(res.output.z_bits)).c_str());
}

// ---------- subcommand payloads ----------

int cmd_keygen(const RunConfig& cfg, std::uint64_t count, const std::string& out, bool raw,
               bool report) {
    EntropyConfig ecfg;
    ecfg.channel = cfg.channel();
    ecfg.seed = cfg.seed;
    LfsrSpec whitener;
    const BitVec bits =
        generate_random_bits(static_cast<std::size_t>(count), ecfg, raw ? nullptr : &whitener);
    write_file(out, pack_msb_first(bits));
    std::printf("wrote %zu %s bits (%zu bytes) to %s\n", bits.size(),
                raw ? "raw" : "whitened", (bits.size() + 7) / 8, out.c_str());
    if (report) {
        const auto fit = fit_run_length(run_length_histogram(bits));
        std::printf("run-length fit: c = %s, eps = %s\n", num(fit.c).c_str(),
                    num(fit.eps).c_str());
    }
    return 0;
}

int cmd_analyze(const RunConfig& cfg, const std::string& out_dir, const std::string& sweep,
                double factor) {
    const auto mary = cfg.mary();
    const auto chan = cfg.channel();
    const double u = mary.dac_step();

    {   // attacker statistics across noise scales
        auto f = open_csv(out_dir, "ps_grid.csv",
                          "sigma_over_u,sigma_v,p_right,p_wrong,p_success,p_error,per_bit_leak");
        std::vector<double> ratios;
        for (int i = 1; i <= 30; ++i) ratios.push_back(i / 10.0);
        for (int i = 7; i <= 60; ++i) ratios.push_back(i / 2.0);
        for (const double ratio : ratios) {
            const auto s = attack_stats(ratio * u, mary);
            f << num(ratio) << ',' << num(ratio * u) << ',' << num(s.p_right) << ','
              << num(s.p_wrong) << ',' << num(s.p_success) << ',' << num(s.p_error) << ','
              << num(s.per_bit_leak) << "\n";
        }
    }

    {   // key fraction surviving distillation
        auto f = open_csv(out_dir, "fraction_grid.csv", "p_success,t,n,lambda,fraction_left");
        const std::uint64_t n = (1 + mary.bits_per_basis()) * cfg.a;
        for (const std::uint64_t lam : {std::uint64_t{1000}, std::uint64_t{10000}}) {
            for (int p = 51; p <= 99; p += 2) {
                const double ps = p / 100.0;
                const std::uint64_t t = leaked_bits(cfg.a, ps);
                f << num(ps) << ',' << t << ',' << n << ',' << lam << ','
                  << num(fraction_left(n, t, lam)) << "\n";
            }
        }
    }

    std::uint64_t lo = 0, hi = 64;
    if (!sweep.empty() &&
        (std::sscanf(sweep.c_str(), "lambda=%" SCNu64 "..%" SCNu64, &lo, &hi) != 2 || hi < lo))
        throw std::invalid_argument("--sweep expects lambda=LO..HI");
    {   // residual information vs security parameter
        auto f = open_csv(out_dir, "ilambda.csv", "lambda,log2_mutual_info,mutual_info");
        for (std::uint64_t lam = lo; lam <= hi; ++lam) {
            const auto bound = pa_leak_bound(static_cast<double>(lam));
            f << lam << ',' << num(bound.log2_bits) << ',' << num(bound.bits) << "\n";
        }
    }

    {   // operating-condition surface across basis counts
        auto f = open_csv(out_dir, "conditions.csv",
                          "levels,sigma_v,adc_lsb,optical_to_thermal,basis_cover_margin,"
                          "bit_margin,optical_dominates_thermal,fluctuation_resolved,"
                          "noise_below_bit_separation,noise_covers_bases,all_satisfied");
        for (unsigned m = 4; m <= 15; ++m) {
            const auto grid = MaryConfig::make(1u << m, cfg.b_max);
            const auto rep = check_conditions(chan, grid, factor);
            f << grid.levels << ',' << num(rep.sigma_optical) << ',' << num(rep.lsb_voltage)
              << ',' << num(rep.optical_to_thermal_ratio) << ','
              << num(rep.basis_cover_margin) << ',' << num(rep.bit_margin) << ','
              << rep.optical_dominates_thermal << ',' << rep.fluctuation_resolved << ','
              << rep.noise_below_bit_separation << ',' << rep.noise_covers_bases << ','
              << rep.all_satisfied() << "\n";
        }
    }

    std::printf("wrote ps_grid.csv, fraction_grid.csv, ilambda.csv, conditions.csv to %s\n",
                out_dir.c_str());
    return 0;
}

int cmd_simulate(const RunConfig& cfg, std::uint64_t rounds, const std::string& transcript_out,
                 const std::string& keystore, bool tap_stats) {
    auto tx = provisioned_pool(cfg);
    auto rx = tx;
    const auto opt = cfg.session_options();
    const auto mary = cfg.mary();

    for (std::uint64_t round = 1; round <= rounds; ++round) {
        auto [ta, tb] = make_loopback_pair();
        RecordingTransport tap(std::move(ta));
        const BitVec fresh = fresh_bits_for_round(cfg, round);

        RoundResult rx_res;
        std::exception_ptr rx_err;
        std::thread rx_thread([&] {
            try {
                rx_res = run_rx_round(*tb, rx, opt);
            } catch (...) {
                rx_err = std::current_exception();
            }
        });
        RoundResult tx_res;
        try {
            tx_res = run_tx_round(tap, tx, fresh, opt);
        } catch (...) {
            rx_thread.join();
            throw;
        }
        rx_thread.join();
        if (rx_err) std::rethrow_exception(rx_err);

        print_budget(tx_res, cfg);
        if (tx_res.output.z_bits != rx_res.output.z_bits)
            throw TranscriptMismatch("simulate: stations disagree");  // unreachable by design
        std::printf("  stations  identical keys\n");

        if (tap_stats) {
            const TapReport rep = run_tap(tap.sent_bytes(), mary);
            std::printf("  tap_per_bit_agreement  %s  (analytic %s)\n",
                        num(agreement(rep.bit_guesses, fresh)).c_str(),
                        num(opt.sigma_v > 0.0 ? attack_stats(opt.sigma_v, mary).p_success : 1.0)
                            .c_str());
            const BitVec guess = tap_reconstruct_z(rep, mary, cfg.seed + 424242);
            std::printf("  tap_post_distillation_agreement  %s\n",
                        num(agreement(guess, tx_res.output.z_bits)).c_str());
        }
        if (!transcript_out.empty() && round == 1) write_file(transcript_out, tap.sent_bytes());
        if (!keystore.empty()) append_keystore(keystore, tx_res.output.z_bits);
    }
    return 0;
}

int cmd_serve_tx(const RunConfig& cfg, std::uint64_t rounds, std::uint64_t max_conn,
                 const std::string& keystore) {
    TcpListener listener(cfg.host, cfg.port);
    std::printf("listening on %s:%u\n", cfg.host.c_str(), listener.port());
    std::fflush(stdout);
    const auto opt = cfg.session_options();

    // connections are served strictly one after another: every accepted RX
    // replays the same provisioned pool, so each session is independent
    for (std::uint64_t conn = 0; max_conn == 0 || conn < max_conn; ++conn) {
        auto t = listener.accept(opt.timeout);
        auto pool = provisioned_pool(cfg);
        for (std::uint64_t round = 1; round <= rounds; ++round) {
            const auto res = run_tx_round(*t, pool, fresh_bits_for_round(cfg, round), opt);
            print_budget(res, cfg);
            if (!keystore.empty()) append_keystore(keystore, res.output.z_bits);
        }
        std::printf("connection %" PRIu64 " served (%" PRIu64 " rounds)\n", conn + 1, rounds);
    }
    return 0;
}

int cmd_serve_rx(const RunConfig& cfg, std::uint64_t rounds, const std::string& keystore) {
    const auto opt = cfg.session_options();
    auto t = tcp_connect(cfg.host, cfg.port, opt.timeout);
    auto pool = provisioned_pool(cfg);
    for (std::uint64_t round = 1; round <= rounds; ++round) {
        const auto res = run_rx_round(*t, pool, opt);
        print_budget(res, cfg);
        if (!keystore.empty()) append_keystore(keystore, res.output.z_bits);
    }
    return 0;
}

int cmd_tap(const RunConfig& cfg, const std::string& transcript_path,
            const std::string& truth_path, const std::string& reconstruct_out,
            std::uint64_t coin_seed) {
    const auto mary = cfg.mary();
    const TapReport rep = run_tap(read_file(transcript_path), mary);
    std::printf("rounds_seen  %u\n", rep.rounds_seen);
    std::printf("samples      %zu\n", rep.samples.size());
    if (rep.pa) {
        std::printf("pa_params    a=%" PRIu64 " t=%" PRIu64 " lambda=%" PRIu64 " mode=%s\n",
                    rep.pa->a, rep.pa->t, rep.pa->lambda,
                    rep.pa->mode == PaMode::permute ? "permute" : "toeplitz");
    } else {
        std::printf("pa_params    (none observed)\n");
    }

    if (!truth_path.empty()) {
        const Bytes packed = read_file(truth_path);
        if (packed.size() * 8 < rep.bit_guesses.size())
            throw std::invalid_argument("truth file holds fewer bits than the transcript");
        const BitVec truth = unpack_msb_first(packed, rep.bit_guesses.size());
        std::printf("per_bit_agreement  %s\n", num(agreement(rep.bit_guesses, truth)).c_str());
    }
    if (!reconstruct_out.empty()) {
        const BitVec guess = tap_reconstruct_z(rep, mary, coin_seed);
        write_file(reconstruct_out, pack_msb_first(guess));
        std::printf("reconstructed %zu key-bit guesses to %s\n", guess.size(),
                    reconstruct_out.c_str());
    }
    return 0;
}

int cmd_encrypt(const RunConfig& cfg, const std::string& key_path, const std::string& in_path,
                const std::string& out_path, std::uint32_t lines) {
    auto matrix = build_key_matrix(read_keystore(key_path));
    const Bytes plain = read_file(in_path);
    if (plain.empty()) throw std::invalid_argument("refusing to encrypt an empty file");
    Rng rng(cfg.seed + 0xE7C);
    const auto envelopes =
        encrypt_message(matrix, unpack_msb_first(plain, plain.size() * 8), rng, lines);
    write_file(out_path, envelopes_to_bytes(envelopes, matrix.d));
    std::printf("encrypted %zu bytes into %zu envelopes (matrix d=%" PRIu64
                ", %u lines each)%s\n",
                plain.size(), envelopes.size(), matrix.d, lines,
                matrix.refresh_needed() ? "; key matrix exhausted, refresh recommended" : "");
    return 0;
}

int cmd_decrypt(const std::string& key_path, const std::string& in_path,
                const std::string& out_path) {
    const auto matrix = build_key_matrix(read_keystore(key_path));
    const auto envelopes = envelopes_from_bytes(read_file(in_path));
    const BitVec bits = decrypt_message(matrix, envelopes);
    if (bits.size() % 8 != 0)
        throw MalformedFrame("decrypted bit count is not a whole number of bytes");
    write_file(out_path, pack_msb_first(bits));
    std::printf("decrypted %zu envelopes into %zu bytes\n", envelopes.size(), bits.size() / 8);
    return 0;
}

int cmd_collide(std::uint64_t total_bits, std::uint64_t max_users, unsigned lines) {
    std::printf("users,d,exact_one,approx_one,exact_all,approx_all\n");
    const std::uint64_t d = isqrt_u64(total_bits);
    for (std::uint64_t users = 2; users <= max_users; ++users) {
        const auto one = collision_prob_one(users, total_bits);
        const auto all = collision_prob_all(users, total_bits, lines);
        std::printf("%" PRIu64 ",%" PRIu64 ",%s,%s,%s,%s\n", users, d, num(one.exact).c_str(),
                    num(one.approx).c_str(), num(all.exact).c_str(), num(all.approx).c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Noise-cloaked M-ary key distribution simulator"};
    app.fallthrough();
    app.set_config("--config", "", "Read options from an INI-style file (flags override)");

    RunConfig cfg;
    bool print_config = false;
    app.add_flag("--print-config", print_config,
                 "Dump the resolved configuration and its HELLO digest, then exit")
        ->configurable(false);

    app.add_option("--power", cfg.power, "Optical power at the detector, W")
        ->capture_default_str();
    app.add_option("--wavelength", cfg.wavelength, "Laser wavelength, m")->capture_default_str();
    app.add_option("--gain", cfg.gain, "Amplifier gain; 0 solves for mean voltage = b-max")
        ->capture_default_str();
    app.add_option("--efficiency", cfg.efficiency, "Detector quantum efficiency (0,1]")
        ->capture_default_str();
    app.add_option("--resistance", cfg.resistance, "Detector load, ohm")->capture_default_str();
    app.add_option("--capacitance", cfg.capacitance, "Detector capacitance, F")
        ->capture_default_str();
    app.add_option("--temperature", cfg.temperature, "Detector temperature, K")
        ->capture_default_str();
    app.add_option("--levels", cfg.levels, "Basis count M (power of two, >= 4)")
        ->capture_default_str();
    app.add_option("--b-max", cfg.b_max, "Bit voltage swing, V (full scale is 2*b-max)")
        ->capture_default_str();
    app.add_option("--a", cfg.a, "Fresh bits per round")->capture_default_str();
    app.add_option("--lambda", cfg.lambda, "Security parameter")->capture_default_str();
    app.add_option("--surcharge", cfg.surcharge,
                   "Extra lambda charged for the public key-equality digest")
        ->capture_default_str();
    app.add_option("--pa-mode", cfg.pa_mode, "Distillation mode: permute or toeplitz")
        ->capture_default_str();
    app.add_option("--t-override", cfg.t_override, "Fixed leak estimate t; -1 = analytic")
        ->capture_default_str();
    app.add_option("--sigma", cfg.sigma,
                   "Cloaking noise scale, V; 0 = derive from channel, negative = cloak off")
        ->capture_default_str();
    app.add_option("--seed", cfg.seed, "Master seed; all randomness derives from it")
        ->capture_default_str();
    app.add_option("--shuffle-seed", cfg.shuffle_seed_hex,
                   "Public 128-bit distillation seed, 32 hex chars; empty = derive")
        ->capture_default_str();
    app.add_option("--host", cfg.host, "Bind/connect address")->capture_default_str();
    app.add_option("--port", cfg.port, "TCP port (0 = ephemeral when listening)")
        ->capture_default_str();
    app.add_option("--timeout-ms", cfg.timeout_ms, "Frame wait timeout, ms")
        ->capture_default_str();

    // keygen
    auto* keygen = app.add_subcommand("keygen", "Generate whitened physical random bits");
    std::uint64_t kg_count = 1 << 20;
    std::string kg_out;
    bool kg_raw = false, kg_report = false;
    keygen->add_option("--count", kg_count, "Bits to generate")->capture_default_str();
    keygen->add_option("--out", kg_out, "Output file (packed bits)")->required();
    keygen->add_flag("--raw", kg_raw, "Skip the whitening stage");
    keygen->add_flag("--report", kg_report, "Print the run-length fit of the output");

    // analyze
    auto* analyze = app.add_subcommand("analyze", "Write the analytic CSV grids");
    std::string an_dir = ".";
    std::string an_sweep = "lambda=0..64";
    double an_factor = 10.0;
    analyze->add_option("--out-dir", an_dir, "Directory for the CSV files")
        ->capture_default_str();
    analyze->add_option("--sweep", an_sweep, "Residual-information sweep, lambda=LO..HI")
        ->capture_default_str();
    analyze->add_option("--factor", an_factor, "Strictness of the >>/<< operating conditions")
        ->capture_default_str();

    // simulate-round
    auto* sim = app.add_subcommand("simulate-round",
                                   "Run TX, RX and the tap in-process over a loopback");
    std::uint64_t sim_rounds = 1;
    std::string sim_transcript, sim_keystore;
    bool sim_no_tap = false;
    sim->add_option("--rounds", sim_rounds, "Rounds to run")->capture_default_str();
    sim->add_option("--dump-transcript", sim_transcript,
                    "Write the first round's TX->RX byte stream to this file");
    sim->add_option("--keystore", sim_keystore, "Append distilled key bits to this file");
    sim->add_flag("--no-tap", sim_no_tap, "Skip the eavesdropper statistics");

    // serve-tx / serve-rx
    auto* stx = app.add_subcommand("serve-tx", "Listen and run TX rounds per connection");
    std::uint64_t stx_rounds = 1, stx_max_conn = 1;
    std::string stx_keystore;
    stx->add_option("--rounds", stx_rounds, "Rounds per connection")->capture_default_str();
    stx->add_option("--max-conn", stx_max_conn, "Connections to serve before exiting; 0 = forever")
        ->capture_default_str();
    stx->add_option("--keystore", stx_keystore, "Append distilled key bits to this file");

    auto* srx = app.add_subcommand("serve-rx", "Connect and run RX rounds");
    std::uint64_t srx_rounds = 1;
    std::string srx_keystore;
    srx->add_option("--rounds", srx_rounds, "Rounds to run")->capture_default_str();
    srx->add_option("--keystore", srx_keystore, "Append distilled key bits to this file");

    // tap
    auto* tap = app.add_subcommand("tap", "Analyze a recorded TX->RX transcript");
    std::string tap_transcript, tap_truth, tap_out;
    std::uint64_t tap_coins = 424242;
    tap->add_option("--transcript", tap_transcript, "Raw concatenated frames")->required();
    tap->add_option("--truth", tap_truth, "Packed ground-truth bits for agreement reporting");
    tap->add_option("--reconstruct-out", tap_out, "Write the best-effort key guess here");
    tap->add_option("--coin-seed", tap_coins, "Seed for the guessed basis bits")
        ->capture_default_str();

    // encrypt / decrypt
    auto* enc = app.add_subcommand("encrypt", "Encrypt a file against a key store");
    std::string enc_key, enc_in, enc_out;
    std::uint32_t enc_lines = 20;
    enc->add_option("--key", enc_key, "Key store (packed bits)")->required();
    enc->add_option("--in", enc_in, "Plaintext file")->required();
    enc->add_option("--out", enc_out, "Envelope stream output")->required();
    enc->add_option("--lines", enc_lines, "Matrix lines XORed per envelope")
        ->capture_default_str();

    auto* dec = app.add_subcommand("decrypt", "Decrypt an envelope stream");
    std::string dec_key, dec_in, dec_out;
    dec->add_option("--key", dec_key, "Key store (packed bits)")->required();
    dec->add_option("--in", dec_in, "Envelope stream")->required();
    dec->add_option("--out", dec_out, "Plaintext output")->required();

    // collide
    auto* col = app.add_subcommand("collide", "Print line-collision probability tables (CSV)");
    std::uint64_t col_bits = 100000000, col_users = 20;
    unsigned col_lines = 20;
    col->add_option("--total-bits", col_bits, "Key bits backing the matrix")
        ->capture_default_str();
    col->add_option("--max-users", col_users, "Largest user count in the table")
        ->capture_default_str();
    col->add_option("--lines", col_lines, "Lines per encryption")->capture_default_str();

    app.require_subcommand(0, 1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (print_config) {
            // top-level keys only: the HELLO digest covers the shared
            // geometry, not per-subcommand switches
            std::istringstream all(app.config_to_str(true, false));
            for (std::string line; std::getline(all, line);)
                if (line.substr(0, line.find('=')).find('.') == std::string::npos)
                    std::cout << line << "\n";
            std::cout << "; hello_digest = " << hex(config_digest(cfg.mary(), cfg.a)) << "\n";
            return 0;
        }
        if (keygen->parsed()) return cmd_keygen(cfg, kg_count, kg_out, kg_raw, kg_report);
        if (analyze->parsed()) return cmd_analyze(cfg, an_dir, an_sweep, an_factor);
        if (sim->parsed())
            return cmd_simulate(cfg, sim_rounds, sim_transcript, sim_keystore, !sim_no_tap);
        if (stx->parsed()) return cmd_serve_tx(cfg, stx_rounds, stx_max_conn, stx_keystore);
        if (srx->parsed()) return cmd_serve_rx(cfg, srx_rounds, srx_keystore);
        if (tap->parsed()) return cmd_tap(cfg, tap_transcript, tap_truth, tap_out, tap_coins);
        if (enc->parsed()) return cmd_encrypt(cfg, enc_key, enc_in, enc_out, enc_lines);
        if (dec->parsed()) return cmd_decrypt(dec_key, dec_in, dec_out);
        if (col->parsed()) return cmd_collide(col_bits, col_users, col_lines);
        std::cout << app.help();
        return 2;
    } catch (const TranscriptMismatch& e) {
        std::fprintf(stderr, "error: kind=verification %s\n", e.what());
        return 4;
    } catch (const ConfigMismatch& e) {
        std::fprintf(stderr, "error: kind=config %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: kind=config %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: kind=protocol %s\n", e.what());
        return 3;
    }
}
