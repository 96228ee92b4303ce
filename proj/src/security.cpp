#include "kbits/security.hpp"

#include <cmath>
#include <stdexcept>

namespace kbits {

namespace {
const double kLn2 = 0.69314718055994530941723212145818;

double weight_total(double sigma_v, const MaryConfig& cfg) {
    const double u = cfg.dac_step();
    double total = 0.0;
    for (std::uint32_t j = 0; j < cfg.levels; ++j) {
        const double x = static_cast<double>(j) * u;
        total += std::exp(-(x * x) / (2.0 * sigma_v * sigma_v));
    }
    return total;
}
}  // namespace

AttackStats attack_stats(double sigma_v, const MaryConfig& cfg) {
    if (!(sigma_v > 0)) throw std::invalid_argument("attack_stats: sigma must be positive");
    const double u = cfg.dac_step();
    double even = 0.0, odd = 0.0;
    for (std::uint32_t j = 0; j < cfg.levels; ++j) {
        const double x = static_cast<double>(j) * u;
        const double w = std::exp(-(x * x) / (2.0 * sigma_v * sigma_v));
        if (j % 2 == 0)
            even += w;
        else
            odd += w;
    }
    const double total = even + odd;
    AttackStats s;
    s.p_right = even / total;
    s.p_wrong = odd / total;
    s.p_success = 0.5 + 0.5 * (s.p_right - s.p_wrong);
    s.p_error = 1.0 - s.p_success;
    s.per_bit_leak = s.p_success - 0.5;
    return s;
}

int ml_attack_guess(double sample_v, const MaryConfig& cfg) {
    // Every DAC-grid point j*u is a candidate level; its bit is the grid
    // parity, inverted on the upper half circle.  The nearest level of each
    // bit lies within two grid steps of the sample, so a 6-point scan is
    // exhaustive.
    const double u = cfg.dac_step();
    const std::uint32_t count = 2 * cfg.levels;
    const double v = wrap(sample_v, cfg);
    const long base = static_cast<long>(std::floor(v / u));

    double best = 1e300;
    bool seen_bit[2] = {false, false};
    for (long off = -2; off <= 3; ++off) {
        long j = (base + off) % static_cast<long>(count);
        if (j < 0) j += count;
        const double level = static_cast<double>(j) * u;
        const double d = cyclic_distance(v, level, cfg);
        const int bit = (j < static_cast<long>(cfg.levels)) ? static_cast<int>(j & 1)
                                                            : static_cast<int>(1 - (j & 1));
        if (d < best) {
            best = d;
            seen_bit[0] = seen_bit[1] = false;
            seen_bit[bit] = true;
        } else if (d == best) {
            seen_bit[bit] = true;
        }
    }
    if (seen_bit[0] && seen_bit[1]) return 0;  // exact tie between opposite bits
    return seen_bit[1] ? 1 : 0;
}

double p_err_b(std::uint32_t q, double sigma_v, const MaryConfig& cfg) {
    if (q == 0 || q >= cfg.levels) throw std::invalid_argument("p_err_b: q out of (0, M)");
    const double x = static_cast<double>(q) * cfg.dac_step();
    return std::exp(-(x * x) / (2.0 * sigma_v * sigma_v)) / weight_total(sigma_v, cfg);
}

double log10_p_err_b(std::uint32_t q, double sigma_v, const MaryConfig& cfg) {
    if (q >= cfg.levels) throw std::invalid_argument("log10_p_err_b: q out of range");
    const double x = static_cast<double>(q) * cfg.dac_step();
    const double log_w = -(x * x) / (2.0 * sigma_v * sigma_v);
    return log_w / std::log(10.0) - std::log10(weight_total(sigma_v, cfg));
}

std::uint64_t leaked_bits(std::uint64_t n, double p_success) {
    if (!(p_success >= 0.5) || !(p_success <= 1.0))
        throw std::invalid_argument("leaked_bits: p_success must be in [0.5, 1]");
    return static_cast<std::uint64_t>(std::ceil(static_cast<double>(n) * (p_success - 0.5)));
}

double fraction_left(std::uint64_t n, std::uint64_t t, std::uint64_t lambda) {
    if (t + lambda > n) throw std::invalid_argument("fraction_left: t + lambda exceeds n");
    if (n == 0) throw std::invalid_argument("fraction_left: n must be positive");
    return static_cast<double>(n - t - lambda) / static_cast<double>(n);
}

PaLeakBound pa_leak_bound(double lambda) {
    if (!(lambda >= 0)) throw std::invalid_argument("pa_leak_bound: lambda must be >= 0");
    PaLeakBound b;
    b.log2_bits = -lambda - std::log2(kLn2);
    b.bits = std::exp2(-lambda) / kLn2;
    return b;
}

void JointDistribution::validate() const {
    if (p.size() != nx * ny || nx == 0 || ny == 0)
        throw std::invalid_argument("JointDistribution: shape mismatch");
    double sum = 0.0;
    for (double v : p) {
        if (v < 0.0) throw std::invalid_argument("JointDistribution: negative probability");
        sum += v;
    }
    if (std::fabs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("JointDistribution: probabilities must sum to 1");
}

std::vector<double> JointDistribution::marginal_x() const {
    std::vector<double> mx(nx, 0.0);
    for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t y = 0; y < ny; ++y) mx[x] += at(x, y);
    return mx;
}

std::vector<double> JointDistribution::marginal_y() const {
    std::vector<double> my(ny, 0.0);
    for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t y = 0; y < ny; ++y) my[y] += at(x, y);
    return my;
}

double shannon_entropy(const std::vector<double>& dist) {
    double sum = 0.0, h = 0.0;
    for (double v : dist) {
        if (v < 0.0) throw std::invalid_argument("shannon_entropy: negative probability");
        sum += v;
        if (v > 0.0) h -= v * std::log2(v);
    }
    if (std::fabs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("shannon_entropy: distribution must sum to 1");
    return h;
}

double conditional_entropy(const JointDistribution& joint) {
    joint.validate();
    const auto my = joint.marginal_y();
    double h = 0.0;
    for (std::size_t x = 0; x < joint.nx; ++x)
        for (std::size_t y = 0; y < joint.ny; ++y) {
            const double pxy = joint.at(x, y);
            if (pxy > 0.0) h -= pxy * std::log2(pxy / my[y]);
        }
    return h;
}

double mutual_information(const JointDistribution& joint) {
    joint.validate();
    const auto mx = joint.marginal_x();
    const auto my = joint.marginal_y();
    double i = 0.0;
    for (std::size_t x = 0; x < joint.nx; ++x)
        for (std::size_t y = 0; y < joint.ny; ++y) {
            const double pxy = joint.at(x, y);
            if (pxy > 0.0) i += pxy * std::log2(pxy / (mx[x] * my[y]));
        }
    return i;
}

double otp_secrecy_check(unsigned message_len, bool uniform_key) {
    if (message_len == 0 || message_len > 8)
        throw std::invalid_argument("otp_secrecy_check: message_len must be 1..8");
    const std::size_t space = std::size_t{1} << message_len;
    JointDistribution joint;
    joint.nx = joint.ny = space;
    joint.p.assign(space * space, 0.0);
    const double pm = 1.0 / static_cast<double>(space);
    for (std::size_t msg = 0; msg < space; ++msg) {
        if (uniform_key) {
            const double pk = pm;
            for (std::size_t key = 0; key < space; ++key)
                joint.p[msg * space + (msg ^ key)] += pm * pk;
        } else {
            joint.p[msg * space + msg] += pm;  // all-zeros key: C = M
        }
    }
    return mutual_information(joint);
}

}  // namespace kbits
