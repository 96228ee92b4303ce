#pragma once

#include "kbits/codec.hpp"

namespace kbits {

// Exact SI values (2019 redefinition) plus CODATA reduced Planck constant.
struct PhysicalConstants {
    double elementary_charge = 1.602176634e-19;  // C
    double boltzmann = 1.380649e-23;             // J/K
    double reduced_planck = 1.054571817e-34;     // J s
    double light_speed = 299792458.0;            // m/s
};

inline constexpr double kDefaultWavelength = 1550e-9;  // telecom band

struct ChannelParams {
    double optical_power;       // W
    double laser_wavelength;    // m
    double gain;                // dimensionless amplifier gain
    double detector_efficiency; // (0, 1]
    double resistance;          // ohm
    double capacitance;         // F
    double temperature;         // K

    void validate() const;
};

// the anchor operating point used throughout the tests and docs
ChannelParams anchor_params();

struct ChannelDerived {
    double photon_rate;    // 1/s
    double mean_voltage;   // V
    double sigma_v;        // V
    double sigma_thermal;  // V
};

double photon_rate(const ChannelParams& p);
double mean_voltage(const ChannelParams& p);
double sigma_v(const ChannelParams& p);
double sigma_thermal(const ChannelParams& p);
ChannelDerived derive_channel(const ChannelParams& p);

// gain that places the mean detector voltage at `target_v` for otherwise fixed params
double gain_for_mean_voltage(const ChannelParams& p, double target_v);

double poisson_pmf(std::uint64_t n, double mean);
double noise_over_signal(double mean_photons);
double lsb(double full_scale, unsigned adc_bits);

// Operating-condition report.  "much greater/less than" is quantified by
// `factor` (default 10): a >> b holds when a >= factor*b.
struct ConditionReport {
    bool optical_dominates_thermal;   // G^2 e^2 eta <n> >> 2 kB T / R
    bool fluctuation_resolved;        // sigma_optical > LSB (plain inequality)
    bool noise_below_bit_separation;  // 4 sigma_V << V_max
    bool noise_covers_bases;          // 2 M sigma_V >> V_max
    double optical_to_thermal_ratio;
    double sigma_optical;             // V
    double lsb_voltage;               // V
    double basis_cover_margin;        // 2 M sigma_V - V_max/2   (V)
    double bit_margin;                // V_max/2 - 4 sigma_V     (V)
    double factor;

    bool all_satisfied() const {
        return optical_dominates_thermal && fluctuation_resolved &&
               noise_below_bit_separation && noise_covers_bases;
    }
};

ConditionReport check_conditions(const ChannelParams& p, const MaryConfig& cfg,
                                 double factor = 10.0);

}  // namespace kbits
