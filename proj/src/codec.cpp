#include "kbits/codec.hpp"

#include <cmath>
#include <stdexcept>

namespace kbits {

MaryConfig MaryConfig::make(std::uint32_t levels, double b_max) {
    if (levels < 4 || (levels & (levels - 1)) != 0)
        throw std::invalid_argument("MaryConfig: levels must be a power of two >= 4");
    if (!(b_max > 0.0) || !std::isfinite(b_max))
        throw std::invalid_argument("MaryConfig: b_max must be positive and finite");
    MaryConfig cfg;
    cfg.levels = levels;
    cfg.b_max = b_max;
    unsigned m = 0;
    for (std::uint32_t v = levels; v > 1; v >>= 1) ++m;
    cfg.m_ = m;
    return cfg;
}

BasisIndex basis_index(const BitVec& basis_bits) {
    if (basis_bits.empty() || basis_bits.size() > 31)
        throw std::invalid_argument("basis_index: need 1..31 bits");
    BasisIndex k = 0;
    for (std::size_t i = 0; i < basis_bits.size(); ++i)
        k |= static_cast<BasisIndex>(basis_bits[i] & 1u) << i;
    return k;
}

double basis_voltage(BasisIndex k, const MaryConfig& cfg) {
    if (k >= cfg.levels) throw std::invalid_argument("basis_voltage: k out of range");
    const double frac = static_cast<double>(k) / static_cast<double>(cfg.levels);
    return (k % 2 == 0) ? cfg.b_max * frac : cfg.b_max * (frac - 1.0);
}

double wrap(double v, const MaryConfig& cfg) {
    const double span = cfg.v_max();
    double r = std::fmod(v, span);
    if (r < 0.0) r += span;
    return r;
}

AdcCode quantize(double v, const MaryConfig& cfg) {
    if (!std::isfinite(v)) throw std::invalid_argument("quantize: non-finite voltage");
    const double idx = std::floor(v / cfg.adc_lsb());
    if (idx < 0.0) return 0;
    if (idx >= static_cast<double>(cfg.levels)) return cfg.levels - 1;
    return static_cast<AdcCode>(idx);
}

double dequantize(AdcCode code, const MaryConfig& cfg) {
    if (code >= cfg.levels) throw std::invalid_argument("dequantize: code out of range");
    return (static_cast<double>(code) + 0.5) * cfg.adc_lsb();
}

AdcCode encode_sample(int bit, BasisIndex k, double noise_v, const MaryConfig& cfg) {
    if (!std::isfinite(noise_v)) throw std::invalid_argument("encode_sample: non-finite noise");
    return quantize(wrap(cfg.bit_level(bit) + basis_voltage(k, cfg) + noise_v, cfg), cfg);
}

WireCode encode_wire_sample(int bit, BasisIndex k, double noise_v, const MaryConfig& cfg) {
    if (!std::isfinite(noise_v)) throw std::invalid_argument("encode_wire_sample: non-finite noise");
    if (cfg.levels > 32768) throw std::invalid_argument("encode_wire_sample: M > 32768 exceeds wire code range");
    const double v = wrap(cfg.bit_level(bit) + basis_voltage(k, cfg) + noise_v, cfg);
    double idx = std::floor(v / cfg.dac_step());
    const double count = 2.0 * static_cast<double>(cfg.levels);
    if (idx < 0.0) idx = 0.0;
    if (idx >= count) idx = count - 1.0;
    return static_cast<WireCode>(idx);
}

double wire_voltage(WireCode w, const MaryConfig& cfg) {
    return static_cast<double>(w) * cfg.dac_step();
}

double cyclic_distance(double a, double b, const MaryConfig& cfg) {
    const double span = cfg.v_max();
    double d = std::fabs(a - b);
    d = std::fmod(d, span);
    return std::min(d, span - d);
}

int decode_sample(AdcCode code, BasisIndex k, const MaryConfig& cfg) {
    const double residual = wrap(dequantize(code, cfg) - basis_voltage(k, cfg), cfg);
    const double d0 = cyclic_distance(residual, 0.0, cfg);
    const double d1 = cyclic_distance(residual, cfg.b_max, cfg);
    return d1 < d0 ? 1 : 0;  // tie -> bit 0
}

}  // namespace kbits
