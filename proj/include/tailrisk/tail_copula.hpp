#pragma once

#include <cstddef>
#include <memory>

#include "tailrisk/core.hpp"

namespace tailrisk {

/// Which nonparametric tail-copula estimator: indicator on 1 - F_hat
/// (empirical) or on ranks shifted by 1/2 (rank).
enum class TailVariant { Empirical = 1, Rank = 2 };

/// Snapshot of a sample's marginal ECDF counts and ranks, enough to evaluate
/// R_hat at any (x, y) in O(n).
class TailCopulaEstimate {
public:
    TailCopulaEstimate(const LossPairSample& sample, std::size_t k, TailVariant variant);
    TailCopulaEstimate(const MarginIndex& mx, const MarginIndex& my, std::size_t k,
                       TailVariant variant);

    TailVariant variant() const { return variant_; }
    std::size_t k() const { return k_; }
    std::size_t n() const { return n_; }

    /// R_hat(x, y) in [0, n/k].
    double operator()(double x, double y) const;

    /// Number of observations counted by the indicator at (x, y).
    std::size_t count(double x, double y) const;

private:
    struct Point {
        std::size_t x_tail;  // n - #{X_j <= X_i} (empirical) or rank R_i^X (rank)
        std::size_t y_tail;
    };

    TailVariant variant_;
    std::size_t k_;
    std::size_t n_;
    std::shared_ptr<const std::vector<Point>> points_;
};

struct EtaEstimate {
    TailVariant variant;
    double value = 0.0;      // reported value, floored at 1/(2k)
    double raw = 0.0;        // Algorithm output before the floor
    bool clamped = false;
};

double r_hat(const LossPairSample& sample, std::size_t k, TailVariant variant, double x,
             double y);

/// Closed-form adjustment-factor estimate via the filtered sub-sample order
/// statistic. Throws EstimationError if the sub-sample is too small for the
/// requested order statistic or no eta in (0,1] reaches the level.
EtaEstimate eta_hat(const LossPairSample& sample, std::size_t k, TailVariant variant);
EtaEstimate eta_hat(const MarginIndex& mx, const MarginIndex& my, std::size_t k,
                    TailVariant variant);

/// Reference evaluation of inf{eta : R_hat(eta, 1) >= k/n} by scanning the jump
/// points of R_hat(., 1). Unclamped.
double eta_hat_bruteforce(const LossPairSample& sample, std::size_t k, TailVariant variant);

}  // namespace tailrisk
