#include "tailrisk/empirical.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tailrisk {

namespace {

void check_k(const MarginIndex& margin, std::size_t k, const char* who) {
    if (k < 1 || k + 1 > margin.size()) {
        std::ostringstream os;
        os << who << ": k=" << k << " outside [1, n-1] for n=" << margin.size();
        throw std::invalid_argument(os.str());
    }
}

// Sum of log X_{n-i+1,n} for i = 1..k, accumulated from the top down.
double top_log_sum(const MarginIndex& margin, std::size_t k) {
    const auto& s = margin.sorted();
    const std::size_t n = s.size();
    double acc = 0.0;
    for (std::size_t i = 1; i <= k; ++i) acc += std::log(s[n - i]);
    return acc;
}

}  // namespace

double hill_estimate(const MarginIndex& margin, std::size_t k) {
    check_k(margin, k, "hill_estimate");
    const double threshold = empirical_var(margin, k);
    if (!(threshold > 0.0)) {
        std::ostringstream os;
        os << "hill_estimate: threshold X_{n-k,n}=" << threshold << " is not positive";
        throw EstimationError(os.str());
    }
    const double gamma =
        top_log_sum(margin, k) / static_cast<double>(k) - std::log(threshold);
    // Each log-ratio is >= 0; rounding can leave a tiny negative residue.
    return gamma < 0.0 ? 0.0 : gamma;
}

double empirical_var(const MarginIndex& margin, std::size_t k) {
    check_k(margin, k, "empirical_var");
    return margin.order_stat(margin.size() - k);
}

double empirical_quantile(const MarginIndex& margin, double tau) {
    if (!(tau > 0.0 && tau < 1.0))
        throw std::invalid_argument("empirical_quantile: tau must lie in (0,1)");
    const double n = static_cast<double>(margin.size());
    // Products like 100 * 0.9 may land a few ulps above the integer they represent.
    auto j = static_cast<std::size_t>(std::ceil(n * tau - 1e-9 * n));
    if (j < 1) j = 1;
    if (j > margin.size()) j = margin.size();
    return margin.order_stat(j);
}

TailProbCurve tail_prob_curve(const LossPairSample& sample, std::span<const double> taus) {
    const MarginIndex mx(sample.xs());
    const MarginIndex my(sample.ys());
    const auto xs = sample.xs();
    const auto ys = sample.ys();
    const double n = static_cast<double>(sample.size());

    TailProbCurve curve;
    curve.taus.reserve(taus.size());
    for (double tau : taus) {
        if (!(tau > 0.0 && tau < 1.0))
            throw std::invalid_argument("tail_prob_curve: tau must lie in (0,1)");
        const double vx = empirical_quantile(mx, tau);
        const double vy = empirical_quantile(my, tau);
        std::size_t count = 0;
        for (std::size_t i = 0; i < xs.size(); ++i)
            if (xs[i] >= vx && ys[i] >= vy) ++count;
        curve.taus.push_back(tau);
        curve.p_hat.push_back(static_cast<double>(count) / n);
        curve.square.push_back((1.0 - tau) * (1.0 - tau));
    }
    return curve;
}

HillCurve hill_curve(const MarginIndex& margin, std::size_t k_min, std::size_t k_max) {
    if (k_min < 2 || k_min > k_max || k_max + 1 > margin.size()) {
        std::ostringstream os;
        os << "hill_curve: need 2 <= k_min <= k_max <= n-1 (got " << k_min << ", " << k_max
           << ", n=" << margin.size() << ")";
        throw std::invalid_argument(os.str());
    }
    HillCurve curve;
    for (std::size_t k = k_min; k <= k_max; ++k) {
        const double g = hill_estimate(margin, k);
        const double half = kHillBandZ / std::sqrt(static_cast<double>(k));
        curve.ks.push_back(k);
        curve.gammas.push_back(g);
        curve.bands.emplace_back(g * (1.0 - half), g * (1.0 + half));
    }
    return curve;
}

}  // namespace tailrisk
