#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tailrisk {

/// Raised when an estimator cannot produce a value for the data at hand
/// (ties that break the sub-sample sizes, gamma >= 1, no admissible eta, ...).
/// Bad arguments raise std::invalid_argument instead.
class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class WarningCode {
    KBelowLowerBound,      // k < n^(2/3)
    LevelBelowIntermediate,// d < 1
    EtaClamped,            // empirical eta floored at 1/(2k)
    GammaAtLeastHalf,      // CoES variant 4 outside its limit theory
};

struct Warning {
    WarningCode code;
    std::string message;

    bool operator==(const Warning&) const = default;
};

const char* to_string(WarningCode code);

/// Paired losses (X_i, Y_i): X the institution, Y the system.
class LossPairSample {
public:
    LossPairSample(std::vector<double> xs, std::vector<double> ys);

    std::span<const double> xs() const { return xs_; }
    std::span<const double> ys() const { return ys_; }
    std::size_t size() const { return xs_.size(); }

private:
    std::vector<double> xs_;
    std::vector<double> ys_;
};

/// Order statistics and 1-based ranks of one margin. Ties are ranked by
/// original index, so ranks is always a permutation of 1..n.
class MarginIndex {
public:
    explicit MarginIndex(std::span<const double> values);

    std::size_t size() const { return sorted_.size(); }
    const std::vector<double>& sorted() const { return sorted_; }
    const std::vector<std::size_t>& ranks() const { return ranks_; }

    /// j-th ascending order statistic X_{j,n}, 1-based.
    double order_stat(std::size_t j) const;

    /// #{j : X_j <= value}, i.e. n * F_hat(value).
    std::size_t count_le(double value) const;

private:
    std::vector<double> sorted_;
    std::vector<std::size_t> ranks_;
};

MarginIndex build_margin_index(std::span<const double> values);

struct TailConfig {
    std::size_t n = 0;
    std::size_t k = 0;
    std::size_t m = 0;  // ceil(k^2 / n)
    std::optional<double> tau_prime;
    std::optional<double> d;  // k / (n (1 - tau'))
    std::vector<Warning> warnings;
};

TailConfig validate_tail_config(std::size_t n, std::size_t k,
                                std::optional<double> tau_prime = std::nullopt);

/// ceil(k^2 / n) in integer arithmetic.
std::size_t derived_count(std::size_t n, std::size_t k);

}  // namespace tailrisk
