#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "tailrisk/core.hpp"

namespace tailrisk {

/// Hill plot: gamma_hat at each k, with approximate 90% normal-limit bands.
struct HillCurve {
    std::vector<std::size_t> ks;
    std::vector<double> gammas;
    std::vector<std::pair<double, double>> bands;
};

/// Empirical P(X >= VaR_X(tau), Y >= VaR_Y(tau)) against (1 - tau)^2.
struct TailProbCurve {
    std::vector<double> taus;
    std::vector<double> p_hat;
    std::vector<double> square;
};

inline constexpr double kHillBandZ = 1.645;

/// Hill estimator over the top k order statistics, thresholded at X_{n-k,n}.
/// Only the top k+1 order statistics need to be positive.
double hill_estimate(const MarginIndex& margin, std::size_t k);

/// X_{n-k,n}.
double empirical_var(const MarginIndex& margin, std::size_t k);

/// Left-continuous empirical tau-quantile X_{ceil(n tau), n}.
double empirical_quantile(const MarginIndex& margin, double tau);

TailProbCurve tail_prob_curve(const LossPairSample& sample, std::span<const double> taus);

HillCurve hill_curve(const MarginIndex& margin, std::size_t k_min, std::size_t k_max);

}  // namespace tailrisk
