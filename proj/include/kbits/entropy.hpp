#pragma once

#include "kbits/bits.hpp"
#include "kbits/channel.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace kbits {

enum class MeanReference { fixed_analytic, running_average };

struct EntropyConfig {
    ChannelParams channel = anchor_params();
    double sampling_window = 1e-9;  // s; metadata for reports, the voltage law already folds R/C
    std::uint64_t seed = 1;
    MeanReference mean_reference = MeanReference::fixed_analytic;

    void validate() const;
};

// Detector voltage samples, Gaussian(<V>, sigma_V), deterministic in the seed.
std::vector<double> sample_voltages(std::size_t count, const EntropyConfig& cfg);

// v > mean -> 1, v < mean -> 0, exact tie -> sample dropped.
BitVec classify_bits(const std::vector<double>& voltages, double mean_reference);

struct LfsrSpec {
    unsigned width = 32;
    std::vector<unsigned> taps = {32, 22, 2, 1};  // 1-based from the output end
    std::uint64_t initial_state = 1;              // nonzero, < 2^width

    void validate() const;
};

// keystream of a Fibonacci LFSR: output is the low (output-end) bit,
// feedback = XOR of the tapped bits shifted in at the top
BitVec lfsr_keystream(std::size_t count, const LfsrSpec& spec);

// whitened[i] = bits[i] XOR keystream[i]
BitVec lfsr_whiten(const BitVec& bits, const LfsrSpec& spec);

// counts of maximal runs of identical bits, both symbols pooled
std::map<std::uint32_t, std::uint64_t> run_length_histogram(const BitVec& bits);

struct RunLengthFit {
    double c = 0.0;    // amplitude, counts
    double eps = 0.0;  // deviation from the ideal halving law
    std::map<std::uint32_t, std::uint64_t> histogram;
};

// Weighted least squares of log count(k) against count(k) = c*exp(-k ln2 (1-eps)),
// weights = counts.  Requires >= 3 nonzero bins.
RunLengthFit fit_run_length(const std::map<std::uint32_t, std::uint64_t>& hist);

// Full generator pipeline: sample -> classify -> (optionally) whiten, looping
// until `count` bits are produced (ties can drop samples).
BitVec generate_random_bits(std::size_t count, const EntropyConfig& cfg,
                            const LfsrSpec* whitener = nullptr);

}  // namespace kbits
