#include "lbcopt/fading.hpp"
#include "lbcopt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace lbcopt {

namespace {

// log of the Erlang survival function: ln( exp(-x) * sum_{k<L} x^k / k! )
// evaluated as -x + logsumexp_k (k*ln x - lgamma(k+1)). Exact at x = 0.
double log_erlang_survival(int L, double x) {
    if (x <= 0.0)
        return 0.0;
    const double lx = std::log(x);
    double m = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < L; ++k)
        m = std::max(m, k * lx - std::lgamma(k + 1.0));
    double s = 0.0;
    for (int k = 0; k < L; ++k)
        s += std::exp(k * lx - std::lgamma(k + 1.0) - m);
    return -x + m + std::log(s);
}

void require_erlang(FadingKind kind, const char* op) {
    if (kind != FadingKind::erlang)
        throw std::invalid_argument(std::string(op) +
                                    ": not defined for a tabulated discrete model");
}

double parse_double(std::string_view tok, const char* what) {
    std::string s(tok);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw std::invalid_argument(std::string("could not parse ") + what + ": '" + s + "'");
    return v;
}

} // namespace

FadingModel FadingModel::erlang(int diversity, double mean_gain) {
    if (diversity < 1)
        throw std::invalid_argument("erlang fading: diversity order must be >= 1");
    if (!(mean_gain > 0.0) || !std::isfinite(mean_gain))
        throw std::invalid_argument("erlang fading: mean gain must be positive and finite");
    FadingModel m;
    m.kind_ = FadingKind::erlang;
    m.diversity_ = diversity;
    m.mean_gain_ = mean_gain;
    // The numeric support is cut at gbar*(50/L + 50); everything downstream
    // (quadrature ranges, root scans) relies on the tail beyond it being
    // negligible, so fail loudly if that ever stops holding.
    const double x_trunc = diversity * m.support_limit() / mean_gain;
    if (log_erlang_survival(diversity, x_trunc) > std::log(1e-15))
        throw std::logic_error("erlang fading: truncation tail mass exceeds 1e-15");
    return m;
}

FadingModel FadingModel::tabulated(std::vector<double> gains, std::vector<double> probabilities) {
    if (gains.empty() || gains.size() != probabilities.size())
        throw std::invalid_argument("tabulated fading: need equally many gains and probabilities");
    double sum = 0.0;
    for (std::size_t i = 0; i < gains.size(); ++i) {
        if (!(gains[i] >= 0.0) || !std::isfinite(gains[i]))
            throw std::invalid_argument("tabulated fading: gains must be finite and >= 0");
        if (i > 0 && !(gains[i] > gains[i - 1]))
            throw std::invalid_argument("tabulated fading: gains must be strictly ascending");
        if (!(probabilities[i] > 0.0))
            throw std::invalid_argument("tabulated fading: probabilities must be > 0");
        sum += probabilities[i];
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("tabulated fading: probabilities must sum to 1 within 1e-12");
    FadingModel m;
    m.kind_ = FadingKind::tabulated_discrete;
    m.gains_ = std::move(gains);
    m.probs_ = std::move(probabilities);
    return m;
}

FadingModel FadingModel::parse(std::string_view spec) {
    if (spec.rfind("erlang:", 0) == 0) {
        std::string_view body = spec.substr(7);
        int L = 0;
        double mean = 0.0;
        bool have_l = false, have_mean = false;
        while (!body.empty()) {
            const std::size_t comma = body.find(',');
            std::string_view field = body.substr(0, comma);
            body = (comma == std::string_view::npos) ? std::string_view{} : body.substr(comma + 1);
            if (field.rfind("L=", 0) == 0) {
                L = static_cast<int>(parse_double(field.substr(2), "L"));
                have_l = true;
            } else if (field.rfind("mean=", 0) == 0) {
                mean = parse_double(field.substr(5), "mean");
                have_mean = true;
            } else {
                throw std::invalid_argument("bad erlang field: '" + std::string(field) + "'");
            }
        }
        if (!have_l || !have_mean)
            throw std::invalid_argument("erlang model string needs both L= and mean=");
        return erlang(L, mean);
    }
    if (spec.rfind("discrete:@", 0) == 0) {
        const std::string path(spec.substr(10));
        std::ifstream in(path);
        if (!in)
            throw std::invalid_argument("cannot open state file: " + path);
        std::string line;
        if (!std::getline(in, line))
            throw std::invalid_argument("state file is empty: " + path);
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line != "gamma,probability")
            throw std::invalid_argument("state file must start with header 'gamma,probability'");
        std::vector<double> g, p;
        std::size_t lineno = 1;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            if (line.empty())
                continue;
            const std::size_t comma = line.find(',');
            if (comma == std::string::npos)
                throw std::invalid_argument("state file line " + std::to_string(lineno) +
                                            ": expected 'gamma,probability'");
            g.push_back(parse_double(std::string_view(line).substr(0, comma), "gamma"));
            p.push_back(parse_double(std::string_view(line).substr(comma + 1), "probability"));
        }
        return tabulated(std::move(g), std::move(p));
    }
    throw std::invalid_argument("unrecognized distribution '" + std::string(spec) +
                                "' (expected 'erlang:L=..,mean=..' or 'discrete:@path')");
}

int FadingModel::diversity() const {
    require_erlang(kind_, "diversity");
    return diversity_;
}

double FadingModel::mean_gain() const {
    require_erlang(kind_, "mean_gain");
    return mean_gain_;
}

double FadingModel::support_limit() const {
    require_erlang(kind_, "support_limit");
    return mean_gain_ * (50.0 / diversity_ + 50.0);
}

double FadingModel::log_pdf(double gain) const {
    require_erlang(kind_, "log_pdf");
    if (gain < 0.0)
        throw std::domain_error("log_pdf: gain must be >= 0");
    const int L = diversity_;
    if (gain == 0.0)
        return (L == 1) ? -std::log(mean_gain_) : -std::numeric_limits<double>::infinity();
    return L * std::log(L / mean_gain_) + (L - 1) * std::log(gain) -
           L * gain / mean_gain_ - std::lgamma(static_cast<double>(L));
}

double FadingModel::pdf(double gain) const {
    return std::exp(log_pdf(gain));
}

double FadingModel::survival(double gain) const {
    if (kind_ == FadingKind::tabulated_discrete)
        return 1.0 - cdf(gain);
    if (gain < 0.0)
        throw std::domain_error("survival: gain must be >= 0");
    return std::exp(log_erlang_survival(diversity_, diversity_ * gain / mean_gain_));
}

double FadingModel::cdf(double gain) const {
    if (kind_ == FadingKind::tabulated_discrete) {
        if (gain < 0.0)
            throw std::domain_error("cdf: gain must be >= 0");
        double acc = 0.0;
        for (std::size_t i = 0; i < gains_.size() && gains_[i] <= gain; ++i)
            acc += probs_[i];
        return acc;
    }
    if (gain < 0.0)
        throw std::domain_error("cdf: gain must be >= 0");
    return -std::expm1(log_erlang_survival(diversity_, diversity_ * gain / mean_gain_));
}

double FadingModel::log_density_slope(double gain) const {
    require_erlang(kind_, "log_density_slope");
    if (!(gain > 0.0))
        throw std::domain_error("log_density_slope: gain must be > 0");
    return (diversity_ - 1) / gain - diversity_ / mean_gain_;
}

FadingModel FadingModel::discretize(double delta_gamma, double gamma_max) const {
    require_erlang(kind_, "discretize");
    if (!(delta_gamma > 0.0) || !(gamma_max > 0.0))
        throw std::invalid_argument("discretize: delta_gamma and gamma_max must be > 0");
    const auto n_bins = static_cast<std::size_t>(std::ceil(gamma_max / delta_gamma));
    std::vector<double> g(n_bins + 1), p(n_bins + 1);
    double below = 0.0; // cdf at the current bin's lower edge
    for (std::size_t i = 0; i < n_bins; ++i) {
        g[i] = i * delta_gamma;
        const double upper = cdf((i + 1) * delta_gamma);
        p[i] = upper - below;
        below = upper;
    }
    g[n_bins] = n_bins * delta_gamma;
    p[n_bins] = 1.0 - below; // tail mass, keeps the total exactly 1

    // Deep-tail bins can round to exactly zero mass; drop them rather than
    // hand zero-probability states to the solvers.
    std::vector<double> gk, pk;
    gk.reserve(g.size());
    pk.reserve(p.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (p[i] > 0.0) {
            gk.push_back(g[i]);
            pk.push_back(p[i]);
        }
    }
    return tabulated(std::move(gk), std::move(pk));
}

const std::vector<double>& FadingModel::gains() const {
    if (kind_ != FadingKind::tabulated_discrete)
        throw std::invalid_argument("gains: model has a continuous density");
    return gains_;
}

const std::vector<double>& FadingModel::probabilities() const {
    if (kind_ != FadingKind::tabulated_discrete)
        throw std::invalid_argument("probabilities: model has a continuous density");
    return probs_;
}

std::size_t FadingModel::state_count() const {
    if (kind_ != FadingKind::tabulated_discrete)
        throw std::invalid_argument("state_count: model has a continuous density");
    return gains_.size();
}

std::string FadingModel::describe() const {
    if (kind_ == FadingKind::erlang) {
        std::ostringstream os;
        os << "erlang:L=" << diversity_ << ",mean=" << mean_gain_;
        return os.str();
    }
    return "discrete:" + std::to_string(gains_.size()) + " states";
}

} // namespace lbcopt
