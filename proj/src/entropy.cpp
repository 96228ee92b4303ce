#include "kbits/entropy.hpp"

#include "kbits/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace kbits {

void EntropyConfig::validate() const {
    channel.validate();
    if (!(sampling_window > 0.0)) throw std::invalid_argument("sampling_window must be positive");
}

std::vector<double> sample_voltages(std::size_t count, const EntropyConfig& cfg) {
    cfg.validate();
    const ChannelDerived d = derive_channel(cfg.channel);
    Rng rng(cfg.seed);
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(d.mean_voltage + d.sigma_v * rng.next_gaussian());
    return out;
}

BitVec classify_bits(const std::vector<double>& voltages, double mean_reference) {
    BitVec bits;
    bits.reserve(voltages.size());
    for (double v : voltages) {
        if (v > mean_reference)
            bits.push_back(1);
        else if (v < mean_reference)
            bits.push_back(0);
        // exact tie: discard
    }
    return bits;
}

void LfsrSpec::validate() const {
    if (width == 0 || width > 63) throw std::invalid_argument("lfsr width must be in [1,63]");
    if (taps.empty()) throw std::invalid_argument("lfsr needs at least one tap");
    for (unsigned t : taps)
        if (t == 0 || t > width) throw std::invalid_argument("lfsr tap out of range");
    if (initial_state == 0) throw std::invalid_argument("lfsr state must be nonzero");
    if (width < 64 && initial_state >= (std::uint64_t{1} << width))
        throw std::invalid_argument("lfsr state wider than the register");
}

BitVec lfsr_keystream(std::size_t count, const LfsrSpec& spec) {
    spec.validate();
    BitVec out;
    out.reserve(count);
    std::uint64_t state = spec.initial_state;
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(static_cast<std::uint8_t>(state & 1u));
        std::uint64_t fb = 0;
        for (unsigned t : spec.taps) fb ^= (state >> (spec.width - t));
        fb &= 1u;
        state = (state >> 1) | (fb << (spec.width - 1));
    }
    return out;
}

BitVec lfsr_whiten(const BitVec& bits, const LfsrSpec& spec) {
    return xor_bits(bits, lfsr_keystream(bits.size(), spec));
}

std::map<std::uint32_t, std::uint64_t> run_length_histogram(const BitVec& bits) {
    std::map<std::uint32_t, std::uint64_t> hist;
    std::size_t i = 0;
    while (i < bits.size()) {
        std::size_t j = i;
        while (j < bits.size() && bits[j] == bits[i]) ++j;
        ++hist[static_cast<std::uint32_t>(j - i)];
        i = j;
    }
    return hist;
}

RunLengthFit fit_run_length(const std::map<std::uint32_t, std::uint64_t>& hist) {
    // log count(k) = log c - k ln2 (1 - eps): weighted linear regression in k,
    // weight = count so the populous short runs dominate
    double sw = 0.0, swx = 0.0, swy = 0.0, swxx = 0.0, swxy = 0.0;
    std::size_t used = 0;
    for (const auto& [k, n] : hist) {
        if (n == 0) continue;
        const double x = static_cast<double>(k);
        const double y = std::log(static_cast<double>(n));
        const double w = static_cast<double>(n);
        sw += w;
        swx += w * x;
        swy += w * y;
        swxx += w * x * x;
        swxy += w * x * y;
        ++used;
    }
    if (used < 3) throw std::invalid_argument("run-length fit needs >= 3 nonzero bins");
    const double det = sw * swxx - swx * swx;
    const double slope = (sw * swxy - swx * swy) / det;
    const double intercept = (swy * swxx - swx * swxy) / det;
    RunLengthFit fit;
    fit.c = std::exp(intercept);
    fit.eps = 1.0 + slope / std::log(2.0);
    fit.histogram = hist;
    return fit;
}

BitVec generate_random_bits(std::size_t count, const EntropyConfig& cfg, const LfsrSpec* whitener) {
    cfg.validate();
    const ChannelDerived d = derive_channel(cfg.channel);
    Rng rng(cfg.seed);
    double running_sum = 0.0;
    std::size_t seen = 0;
    BitVec raw;
    raw.reserve(count);
    while (raw.size() < count) {
        const double v = d.mean_voltage + d.sigma_v * rng.next_gaussian();
        double ref = d.mean_voltage;
        if (cfg.mean_reference == MeanReference::running_average) {
            running_sum += v;
            ++seen;
            ref = running_sum / static_cast<double>(seen);
        }
        if (v > ref)
            raw.push_back(1);
        else if (v < ref)
            raw.push_back(0);
    }
    if (whitener == nullptr) return raw;
    return lfsr_whiten(raw, *whitener);
}

}  // namespace kbits
