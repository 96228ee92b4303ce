#include "kbits/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace kbits {

namespace {
const PhysicalConstants kConst{};
const double kPi = 3.14159265358979323846;
}  // namespace

void ChannelParams::validate() const {
    if (!(optical_power > 0) || !(laser_wavelength > 0) || !(gain > 0) ||
        !(resistance > 0) || !(capacitance > 0) || !(temperature > 0))
        throw std::invalid_argument("ChannelParams: all fields must be positive");
    if (!(detector_efficiency > 0) || detector_efficiency > 1.0)
        throw std::invalid_argument("ChannelParams: efficiency must be in (0, 1]");
}

ChannelParams anchor_params() {
    ChannelParams p;
    p.optical_power = 662e-6;
    p.laser_wavelength = kDefaultWavelength;
    p.gain = 483.322;  // places the mean at 10.0 V, see gain_for_mean_voltage
    p.detector_efficiency = 0.5;
    p.resistance = 50.0;
    p.capacitance = 1e-12;
    p.temperature = 300.0;
    p.validate();
    return p;
}

double photon_rate(const ChannelParams& p) {
    p.validate();
    const double omega = 2.0 * kPi * kConst.light_speed / p.laser_wavelength;
    return p.optical_power / (kConst.reduced_planck * omega);
}

double mean_voltage(const ChannelParams& p) {
    return p.resistance * p.gain * kConst.elementary_charge * p.detector_efficiency *
           photon_rate(p);
}

double sigma_thermal(const ChannelParams& p) {
    p.validate();
    return std::sqrt(kConst.boltzmann * p.temperature / p.capacitance);
}

double sigma_v(const ChannelParams& p) {
    const double ge = p.gain * kConst.elementary_charge;
    const double optical = ge * ge * p.detector_efficiency * photon_rate(p);
    const double thermal = 2.0 * kConst.boltzmann * p.temperature / p.resistance;
    return std::sqrt((p.resistance / (2.0 * p.capacitance)) * (optical + thermal));
}

ChannelDerived derive_channel(const ChannelParams& p) {
    return ChannelDerived{photon_rate(p), mean_voltage(p), sigma_v(p), sigma_thermal(p)};
}

double gain_for_mean_voltage(const ChannelParams& p, double target_v) {
    if (!(target_v > 0)) throw std::invalid_argument("gain_for_mean_voltage: target must be positive");
    ChannelParams q = p;
    q.gain = 1.0;
    return target_v / mean_voltage(q);
}

double poisson_pmf(std::uint64_t n, double mean) {
    if (!(mean > 0)) throw std::invalid_argument("poisson_pmf: mean must be positive");
    const double k = static_cast<double>(n);
    return std::exp(k * std::log(mean) - mean - std::lgamma(k + 1.0));
}

double noise_over_signal(double mean_photons) {
    if (!(mean_photons > 0)) throw std::invalid_argument("noise_over_signal: mean must be positive");
    return 1.0 / std::sqrt(mean_photons);
}

double lsb(double full_scale, unsigned adc_bits) {
    if (!(full_scale > 0)) throw std::invalid_argument("lsb: full scale must be positive");
    if (adc_bits < 1 || adc_bits > 63) throw std::invalid_argument("lsb: bits out of range");
    return full_scale / static_cast<double>(std::uint64_t{1} << adc_bits);
}

ConditionReport check_conditions(const ChannelParams& p, const MaryConfig& cfg, double factor) {
    p.validate();
    if (!(factor >= 1.0)) throw std::invalid_argument("check_conditions: factor must be >= 1");

    const double ge = p.gain * kConst.elementary_charge;
    const double optical_term = ge * ge * p.detector_efficiency * photon_rate(p);
    const double thermal_term = 2.0 * kConst.boltzmann * p.temperature / p.resistance;
    const double sig = sigma_v(p);
    const double sigma_optical =
        std::sqrt((p.resistance / (2.0 * p.capacitance)) * optical_term);
    const double v_max = cfg.v_max();
    const double m = static_cast<double>(cfg.levels);

    ConditionReport r;
    r.factor = factor;
    r.optical_to_thermal_ratio = optical_term / thermal_term;
    r.optical_dominates_thermal = optical_term >= factor * thermal_term;
    r.sigma_optical = sigma_optical;
    r.lsb_voltage = cfg.adc_lsb();
    r.fluctuation_resolved = sigma_optical > cfg.adc_lsb();
    r.noise_below_bit_separation = factor * 4.0 * sig <= v_max;
    r.noise_covers_bases = 2.0 * m * sig >= factor * v_max;
    r.basis_cover_margin = 2.0 * m * sig - v_max / 2.0;
    r.bit_margin = v_max / 2.0 - 4.0 * sig;
    return r;
}

}  // namespace kbits
