#pragma once

#include "kbits/bits.hpp"

#include <cstdint>
#include <vector>

namespace kbits {

// Geometry of the M-ary coding: M basis offsets (m bits each) on top of the
// two bit levels {0, b_max}, everything folded into [0, v_max) with
// v_max = 2*b_max.  The receiver ADC has M levels (LSB = v_max/M); the
// combined bit+basis constellation has 2M distinct levels at pitch
// v_max/(2M), which is the DAC grid the wire samples are expressed in.
struct MaryConfig {
    std::uint32_t levels;  // M, power of two, >= 4
    double b_max;          // V

    static MaryConfig make(std::uint32_t levels, double b_max);

    unsigned bits_per_basis() const { return m_; }             // m = log2 M
    double v_max() const { return 2.0 * b_max; }                // ADC full scale
    double adc_lsb() const { return v_max() / levels; }         // receiver LSB
    double dac_step() const { return b_max / levels; }          // constellation pitch
    double bit_level(int bit) const { return bit ? b_max : 0.0; }

private:
    unsigned m_ = 0;
};

using BasisIndex = std::uint32_t;  // k in [0, M)
using AdcCode = std::uint32_t;     // receiver code in [0, M)
using WireCode = std::uint16_t;    // DAC-grid sample in [0, 2M); needs M <= 32768

BasisIndex basis_index(const BitVec& basis_bits);  // first bit is least significant

// Basis voltage before wrapping: even k -> b_max*k/M, odd k -> b_max*(k/M - 1).
double basis_voltage(BasisIndex k, const MaryConfig& cfg);

// Reduce modulo v_max into [0, v_max); negatives are lifted, not clipped.
double wrap(double v, const MaryConfig& cfg);

AdcCode quantize(double v, const MaryConfig& cfg);
double dequantize(AdcCode code, const MaryConfig& cfg);  // level midpoint

AdcCode encode_sample(int bit, BasisIndex k, double noise_v, const MaryConfig& cfg);

// Same composition, quantized on the 2M-level DAC grid (what BATCH frames carry).
WireCode encode_wire_sample(int bit, BasisIndex k, double noise_v, const MaryConfig& cfg);

inline AdcCode wire_to_adc(WireCode w) { return static_cast<AdcCode>(w >> 1); }
double wire_voltage(WireCode w, const MaryConfig& cfg);  // exact grid voltage

// Legitimate decoding: subtract the known basis, pick the nearest bit level
// under cyclic distance; exact midpoint ties resolve to bit 0.
int decode_sample(AdcCode code, BasisIndex k, const MaryConfig& cfg);

// cyclic distance on the [0, v_max) circle
double cyclic_distance(double a, double b, const MaryConfig& cfg);

}  // namespace kbits
