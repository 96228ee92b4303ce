#pragma once

#include "kbits/codec.hpp"

#include <cstdint>
#include <vector>

namespace kbits {

struct AttackStats {
    double p_right;      // weight share of the even-displacement set (contains j=0)
    double p_wrong;      // odd-displacement share
    double p_success;    // 1/2 + (p_right - p_wrong)/2
    double p_error;      // 1 - p_success
    double per_bit_leak; // p_success - 1/2
};

// Analytic eavesdropper statistics: one-sided Gaussian weights
// w_j = exp(-(j*u)^2 / (2 sigma^2)) over the displacement grid u = v_max/(2M),
// j = 0..M-1, split by displacement parity.
AttackStats attack_stats(double sigma_v, const MaryConfig& cfg);

// Maximum-likelihood bit guess from a full-resolution line sample: among all
// 2M wrapped candidate levels {bit_level + basis_voltage(k)}, return the bit
// of the nearest level under cyclic distance; distance ties between opposite
// bits resolve to bit 0.  Input is the DAC-grid sample (or raw voltage): an
// M-level ADC code merges one level of each bit per bin and carries no bit
// information at all.
int ml_attack_guess(double sample_v, const MaryConfig& cfg);
inline int ml_attack_guess(WireCode w, const MaryConfig& cfg) {
    return ml_attack_guess(wire_voltage(w, cfg), cfg);
}

// probability that noise displaces a sample by exactly q grid steps
double p_err_b(std::uint32_t q, double sigma_v, const MaryConfig& cfg);
double log10_p_err_b(std::uint32_t q, double sigma_v, const MaryConfig& cfg);

// privacy-amplification byte counts
std::uint64_t leaked_bits(std::uint64_t n, double p_success);  // ceil(n*(Ps-1/2))
double fraction_left(std::uint64_t n, std::uint64_t t, std::uint64_t lambda);

struct PaLeakBound {
    double bits;       // 1/(2^lambda ln2); underflows to 0 for very large lambda
    double log2_bits;  // exact: -lambda - log2(ln 2)
};
PaLeakBound pa_leak_bound(double lambda);

struct LeakBudget {
    std::uint64_t n = 0;       // a + m*a shared bits entering PA
    std::uint64_t t = 0;       // estimated leak, destroyed
    std::uint64_t lambda = 0;  // security parameter, destroyed
    std::uint64_t r = 0;       // n - t - lambda kept
    std::uint64_t z = 0;       // a - t - lambda fresh key bits
    double mutual_info_bound_log2 = 0.0;
    double fraction_left = 0.0;
};

// ---- information-theory utilities ----

struct JointDistribution {
    std::size_t nx = 0, ny = 0;
    std::vector<double> p;  // row-major nx*ny, sums to 1

    double at(std::size_t x, std::size_t y) const { return p[x * ny + y]; }
    void validate() const;
    std::vector<double> marginal_x() const;
    std::vector<double> marginal_y() const;
};

double shannon_entropy(const std::vector<double>& dist);     // bits
double conditional_entropy(const JointDistribution& joint);  // H(X|Y)
double mutual_information(const JointDistribution& joint);   // I(X;Y)

// Exhaustive one-time-pad secrecy check: exact joint of (message, ciphertext)
// over all 2^N x 2^N pairs; returns I(M;C).  `uniform_key=false` degenerates
// the key to all-zeros (total leak, for the negative control).
double otp_secrecy_check(unsigned message_len, bool uniform_key = true);

}  // namespace kbits
