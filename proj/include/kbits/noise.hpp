#pragma once

#include "kbits/codec.hpp"
#include "kbits/rng.hpp"

#include <memory>

namespace kbits {

// Source of the additive cloaking noise applied to each coded sample.
// The cloak is a *recorded, digitized* fluctuation: every draw is a
// nonnegative displacement on the DAC grid u = v_max/(2M).  Keeping the
// noise grid-aligned is what makes the analytic even/odd-displacement
// eavesdropper statistics exact for the simulation.
class CloakNoiseSource {
public:
    virtual ~CloakNoiseSource() = default;
    virtual double next() = 0;  // noise voltage, a multiple of dac_step
};

class ZeroNoise final : public CloakNoiseSource {
public:
    double next() override { return 0.0; }
};

// displacement j*u, j in [0, M-1], weights exp(-(j*u)^2 / (2 sigma^2))
class GridGaussianNoise final : public CloakNoiseSource {
public:
    GridGaussianNoise(double sigma_v, const MaryConfig& cfg, std::uint64_t seed)
        : step_(cfg.dac_step()),
          sampler_(sigma_v, cfg.dac_step(), cfg.levels - 1),
          rng_(seed) {}

    double next() override { return static_cast<double>(sampler_.sample(rng_)) * step_; }

private:
    double step_;
    DiscreteGaussian sampler_;
    Rng rng_;
};

// displacement uniform over the whole circle (the "infinite sigma" cloak)
class UniformGridNoise final : public CloakNoiseSource {
public:
    UniformGridNoise(const MaryConfig& cfg, std::uint64_t seed)
        : step_(cfg.dac_step()), count_(2 * cfg.levels), rng_(seed) {}

    double next() override {
        return static_cast<double>(rng_.next_below(count_)) * step_;
    }

private:
    double step_;
    std::uint64_t count_;
    Rng rng_;
};

}  // namespace kbits
