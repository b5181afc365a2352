#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lbcopt {

enum class FadingKind { erlang, tabulated_discrete };

// Channel power-gain distribution. Two kinds:
//
//  * erlang: gain is the average of L iid unit-mean exponential power gains
//    scaled to mean gain gbar, i.e. density
//        f(g) = (L/gbar)^L g^(L-1) exp(-L g / gbar) / (L-1)!
//    L = 1 is Rayleigh fading (exponential power gain); L is the diversity
//    order. Density work is done in log space so large L stays stable.
//
//  * tabulated_discrete: explicit finite state list (gain_i, p_i), gains
//    strictly ascending and nonnegative, p_i > 0, sum p_i = 1 within 1e-12.
//
// Density-based queries (pdf, cdf as a smooth function, log_density_slope,
// discretize) are defined for the erlang kind only and throw
// std::invalid_argument on a tabulated model.
class FadingModel {
public:
    static FadingModel erlang(int diversity, double mean_gain);
    static FadingModel tabulated(std::vector<double> gains, std::vector<double> probabilities);

    // Parses a model string:
    //   "erlang:L=<int>,mean=<float>"
    //   "discrete:@<path>"   (CSV file, header "gamma,probability")
    // Throws std::invalid_argument on malformed input.
    static FadingModel parse(std::string_view spec);

    FadingKind kind() const { return kind_; }
    bool is_erlang() const { return kind_ == FadingKind::erlang; }

    int diversity() const;      // L           (erlang only)
    double mean_gain() const;   // gbar        (erlang only)
    double support_limit() const; // finite truncation point of the numeric
                                  // support, gbar*(50/L + 50); the tail mass
                                  // beyond it is below 1e-15 (checked at
                                  // construction)                (erlang only)

    double pdf(double gain) const;
    double log_pdf(double gain) const;
    double cdf(double gain) const;       // both kinds; step function when discrete
    double survival(double gain) const;  // 1 - cdf, computed without cancellation
    double log_density_slope(double gain) const; // f'(g)/f(g), gain > 0

    // Bins [i*dg, (i+1)*dg) for i = 0 .. ceil(gmax/dg), each state placed at
    // the bin's lower edge, the last state absorbing the tail mass; the
    // probabilities sum to 1 exactly.
    FadingModel discretize(double delta_gamma, double gamma_max) const;

    // State access (tabulated kind only).
    const std::vector<double>& gains() const;
    const std::vector<double>& probabilities() const;
    std::size_t state_count() const;

    // Round-trips through parse() for erlang models; "discrete:<n states>"
    // descriptive form otherwise.
    std::string describe() const;

private:
    FadingModel() = default;

    FadingKind kind_ = FadingKind::erlang;
    int diversity_ = 1;
    double mean_gain_ = 1.0;
    std::vector<double> gains_;
    std::vector<double> probs_;
};

} // namespace lbcopt
