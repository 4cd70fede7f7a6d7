#pragma once

#include <map>
#include <shared_mutex>
#include <tuple>

#include "tailrisk/models.hpp"

namespace tailrisk {

struct OracleResult {
    double tau = 0.0;
    double var_y = 0.0;
    double covar = 0.0;
    double coes = 0.0;
    double abs_tol = 0.0;  // bisection bracket width plus quadrature error bound
};

/// P(X >= s, Y >= t) under the model. Closed form for Logistic and Pareto2;
/// a one-dimensional conditional-t integral for Cauchy and StudentT.
double joint_survival(const ModelSpec& spec, double s, double t);

/// Same probability by two-dimensional quadrature of the joint density of
/// (Z1, Z2). Slower; kept as an independent route for cross-checks. Not
/// available for Logistic.
double joint_survival_by_density(const ModelSpec& spec, double s, double t);

/// Solves P(X >= c, Y >= VaR_Y(tau)) = (1 - tau)^2 by bisection on
/// [VaR_X(tau), upper], doubling upper until it brackets.
double true_covar(const ModelSpec& spec, double tau, double rel_tol = 1e-9);

/// c + (1 - tau)^-2 * int_c^inf P(X >= s, Y >= VaR_Y(tau)) ds.
double true_coes(const ModelSpec& spec, double tau);

OracleResult oracle_point(const ModelSpec& spec, double tau);

/// Population adjustment factor P(X >= CoVaR) / (1 - tau).
double true_eta(const ModelSpec& spec, double tau);

/// Solution of R(eta, 1) = 1 - tau in (0, 1].
double eta_star(const ModelSpec& spec, double tau);

/// Memoized oracle points keyed by (model, tau). Concurrent readers are safe;
/// a miss computes outside the lock and inserts under a unique lock.
class OracleCache {
public:
    OracleResult get(const ModelSpec& spec, double tau);
    std::size_t size() const;

private:
    using Key = std::tuple<int, double, double, double, double>;
    mutable std::shared_mutex mutex_;
    std::map<Key, OracleResult> table_;
};

}  // namespace tailrisk
