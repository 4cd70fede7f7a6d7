#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "tailrisk/core.hpp"
#include "tailrisk/tail_copula.hpp"

namespace tailrisk {

/// Extreme CoVaR extrapolations: through eta_hat (empirical or rank
/// variant) or through the intermediate CoVaR.
enum class CovarMethod { EtaEmpirical = 1, EtaRank = 2, Intermediate = 3 };

/// Extreme CoES extrapolations: 1-3 scale the matching CoVaR by 1/(1-gamma),
/// 4 extrapolates the intermediate CoES directly.
enum class CoesMethod { EtaEmpirical = 1, EtaRank = 2, Intermediate = 3, IntermediateCoes = 4 };

struct RiskEstimates {
    std::size_t n = 0;
    std::size_t k = 0;
    std::size_t m = 0;
    double tau_prime = 0.0;
    double d = 0.0;

    double gamma1_hat = 0.0;
    double var_x_hat = 0.0;
    double eta_hat_1 = 0.0;
    double eta_hat_2 = 0.0;
    double covar_int = 0.0;
    double coes_int = 0.0;
    std::array<double, 3> covar_ext{};  // covar1..covar3
    std::array<double, 4> coes_ext{};   // coes1..coes4
    std::vector<Warning> warnings;

    double covar(CovarMethod method) const { return covar_ext[static_cast<int>(method) - 1]; }
    double coes(CoesMethod method) const { return coes_ext[static_cast<int>(method) - 1]; }
};

/// Intermediate CoVaR at level 1 - k/n: the (k+2-m)-th smallest X among the
/// k+1 observations with Y_i >= Y_{n-k,n}.
double intermediate_covar(const LossPairSample& sample, std::size_t k);

/// (n/k^2) * sum of X_i over observations beyond both intermediate thresholds.
double intermediate_coes(const LossPairSample& sample, std::size_t k);

/// Reference evaluation of sup{s : C_n(s) >= (k/n)^2} by scanning every
/// filtered X value.
double intermediate_covar_bruteforce(const LossPairSample& sample, std::size_t k);

// Closed-form pieces of the extrapolation, d = k / (n (1 - tau')).
double extrapolate_covar_from_eta(double gamma, double eta, double var_x, double d);
double extrapolate_covar_from_intermediate(double gamma, double covar_int, double d);
double coes_from_covar(double covar, double gamma);  // EstimationError when gamma >= 1
double extrapolate_coes_from_intermediate(double gamma, double coes_int, double d);

double extrapolate_covar(const LossPairSample& sample, std::size_t k, double tau_prime,
                         CovarMethod method);
double extrapolate_coes(const LossPairSample& sample, std::size_t k, double tau_prime,
                        CoesMethod method);

/// Every estimator from one pair of margin indexes. Warnings collect the
/// config checks, clamped eta values and gamma >= 1/2.
RiskEstimates estimate_all(const LossPairSample& sample, std::size_t k, double tau_prime);

/// Field-wise mean of estimate_all over k in [k_min, k_max]. Warnings are the
/// union over k; any failing k propagates its error.
RiskEstimates estimate_all_averaged(const LossPairSample& sample, std::size_t k_min,
                                    std::size_t k_max, double tau_prime);

}  // namespace tailrisk
