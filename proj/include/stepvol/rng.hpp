#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>

#include <boost/math/special_functions/erf.hpp>

namespace stepvol {

// Seeded random source shared by the samplers and simulators.
//
// normal() maps exactly one engine output through the inverse normal CDF,
// so a path of n+1 states consumes exactly n+1 engine outputs in call
// order. Gamma draws go through std::gamma_distribution and may consume a
// variable number of engine outputs per variate.
class Rng {
public:
    using engine_type = std::mt19937_64;

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // uniform on (0,1), endpoints excluded, one engine output
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    // standard normal via inverse-CDF, one engine output
    double normal() {
        return std::numbers::sqrt2 * boost::math::erf_inv(2.0 * uniform() - 1.0);
    }

    // Gamma(shape, scale), density x^{shape-1} e^{-x/scale}
    double gamma(double shape, double scale) {
        if (!(shape > 0.0) || !(scale > 0.0))
            throw std::domain_error("gamma draw requires positive shape and scale");
        std::gamma_distribution<double> dist(shape, scale);
        for (int attempt = 0; attempt < 256; ++attempt) {
            const double g = dist(engine_);
            if (g > 0.0 && std::isfinite(g)) return g;
        }
        throw std::runtime_error("gamma draw degenerated to zero (shape too small)");
    }

    // InverseGamma(shape, scale), density prop. to x^{-shape-1} e^{-scale/x},
    // drawn as the reciprocal of a Gamma(shape, 1/scale) variate
    double inverse_gamma(double shape, double scale) {
        if (!(scale > 0.0))
            throw std::domain_error("inverse-gamma draw requires positive scale");
        return 1.0 / gamma(shape, 1.0 / scale);
    }

    engine_type& engine() { return engine_; }

private:
    engine_type engine_;
};

} // namespace stepvol
