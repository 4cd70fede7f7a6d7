#include "tailrisk/tail_copula.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tailrisk {

namespace {

// Arguments within this distance of an integer jump point are snapped onto it,
// so that R_hat evaluated at eta = j/k hits the jump j exactly.
constexpr double kSnap = 1e-9;

void check_k(std::size_t n, std::size_t k, const char* who) {
    if (k < 1 || k >= n) {
        std::ostringstream os;
        os << who << ": k=" << k << " outside [1, n-1] for n=" << n;
        throw std::invalid_argument(os.str());
    }
}

}  // namespace

TailCopulaEstimate::TailCopulaEstimate(const LossPairSample& sample, std::size_t k,
                                       TailVariant variant)
    : TailCopulaEstimate(MarginIndex(sample.xs()), MarginIndex(sample.ys()), k, variant) {}

TailCopulaEstimate::TailCopulaEstimate(const MarginIndex& mx, const MarginIndex& my,
                                       std::size_t k, TailVariant variant)
    : variant_(variant), k_(k), n_(mx.size()) {
    if (my.size() != n_) throw std::invalid_argument("TailCopulaEstimate: margin sizes differ");
    check_k(n_, k, "TailCopulaEstimate");

    auto pts = std::make_shared<std::vector<Point>>(n_);
    // Observation values are recovered from sorted[rank - 1].
    for (std::size_t i = 0; i < n_; ++i) {
        const std::size_t rx = mx.ranks()[i];
        const std::size_t ry = my.ranks()[i];
        if (variant == TailVariant::Empirical) {
            (*pts)[i] = {n_ - mx.count_le(mx.sorted()[rx - 1]),
                         n_ - my.count_le(my.sorted()[ry - 1])};
        } else {
            (*pts)[i] = {rx, ry};
        }
    }
    points_ = std::move(pts);
}

std::size_t TailCopulaEstimate::count(double x, double y) const {
    if (!(x >= 0.0) || !(y >= 0.0))
        throw std::invalid_argument("R_hat: arguments must be non-negative");
    const double kd = static_cast<double>(k_);
    std::size_t c = 0;
    if (variant_ == TailVariant::Empirical) {
        // 1 - F_hat(X_i) <= x k / n  <=>  n - #{X_j <= X_i} <= x k
        const double bx = x * kd + kSnap;
        const double by = y * kd + kSnap;
        for (const auto& p : *points_)
            if (static_cast<double>(p.x_tail) <= bx && static_cast<double>(p.y_tail) <= by) ++c;
    } else {
        const double nh = static_cast<double>(n_) + 0.5;
        const double bx = nh - x * kd - kSnap;
        const double by = nh - y * kd - kSnap;
        for (const auto& p : *points_)
            if (static_cast<double>(p.x_tail) >= bx && static_cast<double>(p.y_tail) >= by) ++c;
    }
    return c;
}

double TailCopulaEstimate::operator()(double x, double y) const {
    return static_cast<double>(count(x, y)) / static_cast<double>(k_);
}

double r_hat(const LossPairSample& sample, std::size_t k, TailVariant variant, double x,
             double y) {
    return TailCopulaEstimate(sample, k, variant)(x, y);
}

EtaEstimate eta_hat(const LossPairSample& sample, std::size_t k, TailVariant variant) {
    return eta_hat(MarginIndex(sample.xs()), MarginIndex(sample.ys()), k, variant);
}

EtaEstimate eta_hat(const MarginIndex& mx, const MarginIndex& my, std::size_t k,
                    TailVariant variant) {
    const std::size_t n = mx.size();
    if (my.size() != n) throw std::invalid_argument("eta_hat: margin sizes differ");
    const TailConfig cfg = validate_tail_config(n, k);
    const std::size_t m = cfg.m;

    EtaEstimate est{variant, 0.0, 0.0, false};
    if (variant == TailVariant::Empirical) {
        // Keep observations with 1 - F_hat_Y(Y_i) <= k/n; collect n (1 - F_hat_X(X_i)).
        std::vector<std::size_t> z;
        z.reserve(k + 1);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t ry = my.ranks()[i];
            if (n - my.count_le(my.sorted()[ry - 1]) <= k) {
                const std::size_t rx = mx.ranks()[i];
                z.push_back(n - mx.count_le(mx.sorted()[rx - 1]));
            }
        }
        if (z.size() < m) {
            std::ostringstream os;
            os << "eta_hat: filtered sub-sample has " << z.size() << " points, need m=" << m;
            throw EstimationError(os.str());
        }
        std::nth_element(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(m - 1), z.end());
        const std::size_t j = z[m - 1];
        // (n/k) * (j/n) = j/k
        est.raw = static_cast<double>(j) / static_cast<double>(k);
    } else {
        // Keep observations with R_i^Y >= n + 1/2 - k, i.e. R_i^Y > n - k.
        std::vector<std::size_t> r;
        r.reserve(k);
        for (std::size_t i = 0; i < n; ++i)
            if (my.ranks()[i] > n - k) r.push_back(mx.ranks()[i]);
        if (r.size() != k || k + 1 - m < 1) {
            std::ostringstream os;
            os << "eta_hat: rank sub-sample has " << r.size() << " points, expected k=" << k;
            throw EstimationError(os.str());
        }
        const std::size_t idx = k + 1 - m;
        std::nth_element(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(idx - 1), r.end());
        est.raw = (static_cast<double>(n) + 0.5 - static_cast<double>(r[idx - 1])) /
                  static_cast<double>(k);
    }

    if (est.raw > 1.0) {
        std::ostringstream os;
        os << "eta_hat: no adjustment factor in (0,1] reaches level k/n (raw=" << est.raw
           << "); upper tails look independent";
        throw EstimationError(os.str());
    }

    const double floor = 0.5 / static_cast<double>(k);
    est.value = est.raw;
    if (est.raw < floor) {
        est.value = floor;
        est.clamped = true;
    }
    return est;
}

double eta_hat_bruteforce(const LossPairSample& sample, std::size_t k, TailVariant variant) {
    const std::size_t n = sample.size();
    check_k(n, k, "eta_hat_bruteforce");
    const TailCopulaEstimate rhat(sample, k, variant);
    const double level = static_cast<double>(k) / static_cast<double>(n);
    const double kd = static_cast<double>(k);

    std::vector<double> candidates;
    if (variant == TailVariant::Empirical) {
        for (std::size_t j = 0; j <= k; ++j) candidates.push_back(static_cast<double>(j) / kd);
        candidates.push_back(1.0);
    } else {
        for (std::size_t r = n; r + k >= n; --r) {
            const double eta = (static_cast<double>(n) + 0.5 - static_cast<double>(r)) / kd;
            if (eta > 0.0 && eta <= 1.0) candidates.push_back(eta);
            if (r == 0) break;
        }
    }
    std::sort(candidates.begin(), candidates.end());
    for (double eta : candidates)
        if (rhat(eta, 1.0) >= level) return eta;
    throw EstimationError("eta_hat_bruteforce: no candidate reaches level k/n");
}

}  // namespace tailrisk
