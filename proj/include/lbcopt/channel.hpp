#pragma once

#include "lbcopt/fading.hpp"

#include <cmath>
#include <stdexcept>

namespace lbcopt {

// One operating point: transmit power budget P (linear SNR scale, noise
// normalized to 1), bandwidth ratio b (source symbols per channel symbol,
// the distortion exponent knob), and the fading distribution.
struct ChannelConfig {
    double power = 1.0;          // P > 0, or 0 for the degenerate no-power case
    double bandwidth_ratio = 1.0; // b > 0
    FadingModel fading = FadingModel::erlang(1, 1.0);

    void validate() const {
        if (!(power >= 0.0) || !std::isfinite(power))
            throw std::invalid_argument("channel config: power must be >= 0 and finite");
        if (!(bandwidth_ratio > 0.0) || !std::isfinite(bandwidth_ratio))
            throw std::invalid_argument("channel config: bandwidth ratio must be > 0");
    }
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

} // namespace lbcopt
