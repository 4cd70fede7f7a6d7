#include "tailrisk/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace tailrisk {

const char* to_string(WarningCode code) {
    switch (code) {
        case WarningCode::KBelowLowerBound: return "k_below_lower_bound";
        case WarningCode::LevelBelowIntermediate: return "level_below_intermediate";
        case WarningCode::EtaClamped: return "eta_clamped";
        case WarningCode::GammaAtLeastHalf: return "gamma_at_least_half";
    }
    return "unknown";
}

namespace {

void require_finite(std::span<const double> values, const char* what) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            std::ostringstream os;
            os << what << ": non-finite entry at index " << i;
            throw std::invalid_argument(os.str());
        }
    }
}

}  // namespace

LossPairSample::LossPairSample(std::vector<double> xs, std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
    if (xs_.size() != ys_.size())
        throw std::invalid_argument("LossPairSample: xs and ys differ in length");
    if (xs_.size() < 2)
        throw std::invalid_argument("LossPairSample: need at least 2 pairs");
    require_finite(xs_, "LossPairSample xs");
    require_finite(ys_, "LossPairSample ys");
}

MarginIndex::MarginIndex(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("MarginIndex: empty input");
    require_finite(values, "MarginIndex");

    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    sorted_.resize(n);
    ranks_.resize(n);
    for (std::size_t pos = 0; pos < n; ++pos) {
        sorted_[pos] = values[order[pos]];
        ranks_[order[pos]] = pos + 1;
    }
}

double MarginIndex::order_stat(std::size_t j) const {
    if (j < 1 || j > sorted_.size())
        throw std::out_of_range("MarginIndex::order_stat: index out of range");
    return sorted_[j - 1];
}

std::size_t MarginIndex::count_le(double value) const {
    return static_cast<std::size_t>(
        std::upper_bound(sorted_.begin(), sorted_.end(), value) - sorted_.begin());
}

MarginIndex build_margin_index(std::span<const double> values) {
    return MarginIndex(values);
}

std::size_t derived_count(std::size_t n, std::size_t k) {
    return (k * k + n - 1) / n;
}

TailConfig validate_tail_config(std::size_t n, std::size_t k,
                                std::optional<double> tau_prime) {
    if (n < 2) throw std::invalid_argument("validate_tail_config: n must be >= 2");
    if (k == 0 || k >= n) {
        std::ostringstream os;
        os << "validate_tail_config: k must satisfy 1 <= k < n (k=" << k << ", n=" << n
           << ")";
        throw std::invalid_argument(os.str());
    }

    TailConfig cfg;
    cfg.n = n;
    cfg.k = k;
    cfg.m = derived_count(n, k);
    if (cfg.m < 1 || cfg.m > k)
        throw std::invalid_argument("validate_tail_config: m = ceil(k^2/n) outside [1, k]");

    if (static_cast<double>(k) < std::pow(static_cast<double>(n), 2.0 / 3.0)) {
        std::ostringstream os;
        os << "k=" << k << " below n^(2/3)=" << std::pow(static_cast<double>(n), 2.0 / 3.0);
        cfg.warnings.push_back({WarningCode::KBelowLowerBound, os.str()});
    }

    if (tau_prime) {
        const double tp = *tau_prime;
        if (!(tp > 0.0 && tp < 1.0))
            throw std::invalid_argument("validate_tail_config: tau' must lie in (0,1)");
        const double d =
            static_cast<double>(k) / (static_cast<double>(n) * (1.0 - tp));
        if (!(d > 0.0) || !std::isfinite(d))
            throw std::invalid_argument("validate_tail_config: extrapolation ratio not positive");
        cfg.tau_prime = tp;
        cfg.d = d;
        if (d < 1.0) {
            std::ostringstream os;
            os << "d=" << d << " < 1: tau' not beyond the intermediate level 1-k/n";
            cfg.warnings.push_back({WarningCode::LevelBelowIntermediate, os.str()});
        }
    }
    return cfg;
}

}  // namespace tailrisk
