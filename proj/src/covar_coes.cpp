#include "tailrisk/covar_coes.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "tailrisk/empirical.hpp"

namespace tailrisk {

namespace {

struct Intermediate {
    double var_y = 0.0;
    double covar = 0.0;
    double coes = 0.0;
};

Intermediate intermediate_from(const LossPairSample& sample, const MarginIndex& my,
                               const TailConfig& cfg) {
    const std::size_t n = cfg.n;
    const std::size_t k = cfg.k;
    const std::size_t m = cfg.m;
    const auto xs = sample.xs();
    const auto ys = sample.ys();

    Intermediate out;
    out.var_y = empirical_var(my, k);

    std::vector<double> filtered;
    filtered.reserve(k + 1);
    for (std::size_t i = 0; i < n; ++i)
        if (ys[i] >= out.var_y) filtered.push_back(xs[i]);
    if (filtered.size() != k + 1) {
        std::ostringstream os;
        os << "intermediate_covar: " << filtered.size()
           << " observations reach VaR_Y, expected k+1=" << k + 1 << " (ties in Y)";
        throw EstimationError(os.str());
    }
    const std::size_t idx = k + 2 - m;  // 2 <= idx <= k+1 since 1 <= m <= k
    std::nth_element(filtered.begin(), filtered.begin() + static_cast<std::ptrdiff_t>(idx - 1),
                     filtered.end());
    out.covar = filtered[idx - 1];

    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (xs[i] >= out.covar && ys[i] >= out.var_y) acc += xs[i];
    out.coes = static_cast<double>(n) / (static_cast<double>(k) * static_cast<double>(k)) * acc;
    return out;
}

void require_gamma_below_one(double gamma, const char* who) {
    if (!(gamma < 1.0)) {
        std::ostringstream os;
        os << who << ": gamma_hat=" << gamma << " >= 1, extrapolation undefined";
        throw EstimationError(os.str());
    }
}

// d^(2 gamma)
double growth(double d, double gamma) { return std::pow(d, 2.0 * gamma); }

struct Pair {
    double covar;
    double coes;
};

// CoVaR is rebuilt from CoES so that coes * (1 - gamma) == covar holds exactly.
Pair paired(double raw_covar, double gamma) {
    const double coes = coes_from_covar(raw_covar, gamma);
    return {coes * (1.0 - gamma), coes};
}

}  // namespace

double extrapolate_covar_from_eta(double gamma, double eta, double var_x, double d) {
    return growth(d, gamma) * std::pow(eta, -gamma) * var_x;
}

double extrapolate_covar_from_intermediate(double gamma, double covar_int, double d) {
    return growth(d, gamma) * covar_int;
}

double coes_from_covar(double covar, double gamma) {
    require_gamma_below_one(gamma, "coes_from_covar");
    return covar / (1.0 - gamma);
}

double extrapolate_coes_from_intermediate(double gamma, double coes_int, double d) {
    return growth(d, gamma) * coes_int;
}

double intermediate_covar(const LossPairSample& sample, std::size_t k) {
    const TailConfig cfg = validate_tail_config(sample.size(), k);
    return intermediate_from(sample, MarginIndex(sample.ys()), cfg).covar;
}

double intermediate_coes(const LossPairSample& sample, std::size_t k) {
    const TailConfig cfg = validate_tail_config(sample.size(), k);
    return intermediate_from(sample, MarginIndex(sample.ys()), cfg).coes;
}

double intermediate_covar_bruteforce(const LossPairSample& sample, std::size_t k) {
    const std::size_t n = sample.size();
    if (k < 1 || k >= n) throw std::invalid_argument("intermediate_covar_bruteforce: bad k");
    const MarginIndex my(sample.ys());
    const double var_y = my.order_stat(n - k);
    const auto xs = sample.xs();
    const auto ys = sample.ys();

    // n * C_n(s)
    auto count_at = [&](double s) {
        std::size_t c = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (xs[i] >= s && ys[i] >= var_y) ++c;
        return c;
    };

    // C_n is a non-increasing step function of s whose jumps sit at the
    // filtered X values, so the supremum is attained at one of them.
    // C_n(s) >= (k/n)^2  <=>  n * count >= k^2, compared in integers.
    bool found = false;
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (ys[i] < var_y) continue;
        if (n * count_at(xs[i]) >= k * k && (!found || xs[i] > best)) {
            best = xs[i];
            found = true;
        }
    }
    if (!found) throw EstimationError("intermediate_covar_bruteforce: level never reached");
    return best;
}

namespace {

Pair extrapolate_pair(const LossPairSample& sample, std::size_t k, double tau_prime,
                      CovarMethod method) {
    const TailConfig cfg = validate_tail_config(sample.size(), k, tau_prime);
    const MarginIndex mx(sample.xs());
    const MarginIndex my(sample.ys());
    const double gamma = hill_estimate(mx, k);
    require_gamma_below_one(gamma, "extrapolate_covar");

    switch (method) {
        case CovarMethod::EtaEmpirical:
        case CovarMethod::EtaRank: {
            const auto variant = method == CovarMethod::EtaEmpirical ? TailVariant::Empirical
                                                                     : TailVariant::Rank;
            const EtaEstimate eta = eta_hat(mx, my, k, variant);
            return paired(extrapolate_covar_from_eta(gamma, eta.value, empirical_var(mx, k), *cfg.d),
                          gamma);
        }
        case CovarMethod::Intermediate:
            return paired(extrapolate_covar_from_intermediate(
                              gamma, intermediate_from(sample, my, cfg).covar, *cfg.d),
                          gamma);
    }
    throw std::invalid_argument("extrapolate_covar: unknown method");
}

}  // namespace

double extrapolate_covar(const LossPairSample& sample, std::size_t k, double tau_prime,
                         CovarMethod method) {
    return extrapolate_pair(sample, k, tau_prime, method).covar;
}

double extrapolate_coes(const LossPairSample& sample, std::size_t k, double tau_prime,
                        CoesMethod method) {
    if (method == CoesMethod::IntermediateCoes) {
        const TailConfig cfg = validate_tail_config(sample.size(), k, tau_prime);
        const MarginIndex mx(sample.xs());
        const MarginIndex my(sample.ys());
        const double gamma = hill_estimate(mx, k);
        return extrapolate_coes_from_intermediate(gamma, intermediate_from(sample, my, cfg).coes,
                                                  *cfg.d);
    }
    return extrapolate_pair(sample, k, tau_prime, static_cast<CovarMethod>(static_cast<int>(method)))
        .coes;
}

RiskEstimates estimate_all(const LossPairSample& sample, std::size_t k, double tau_prime) {
    const TailConfig cfg = validate_tail_config(sample.size(), k, tau_prime);
    const MarginIndex mx(sample.xs());
    const MarginIndex my(sample.ys());

    RiskEstimates r;
    r.n = cfg.n;
    r.k = cfg.k;
    r.m = cfg.m;
    r.tau_prime = *cfg.tau_prime;
    r.d = *cfg.d;
    r.warnings = cfg.warnings;

    r.gamma1_hat = hill_estimate(mx, k);
    require_gamma_below_one(r.gamma1_hat, "estimate_all");
    r.var_x_hat = empirical_var(mx, k);

    const EtaEstimate e1 = eta_hat(mx, my, k, TailVariant::Empirical);
    const EtaEstimate e2 = eta_hat(mx, my, k, TailVariant::Rank);
    r.eta_hat_1 = e1.value;
    r.eta_hat_2 = e2.value;
    for (const auto& e : {e1, e2}) {
        if (e.clamped) {
            std::ostringstream os;
            os << "eta variant " << static_cast<int>(e.variant) << " raw value " << e.raw
               << " floored at 1/(2k)=" << e.value;
            r.warnings.push_back({WarningCode::EtaClamped, os.str()});
        }
    }

    const Intermediate inter = intermediate_from(sample, my, cfg);
    r.covar_int = inter.covar;
    r.coes_int = inter.coes;

    const double gm = r.gamma1_hat;
    const std::array<double, 3> raw{
        extrapolate_covar_from_eta(gm, r.eta_hat_1, r.var_x_hat, r.d),
        extrapolate_covar_from_eta(gm, r.eta_hat_2, r.var_x_hat, r.d),
        extrapolate_covar_from_intermediate(gm, r.covar_int, r.d)};
    for (std::size_t i = 0; i < 3; ++i) {
        const Pair p = paired(raw[i], gm);
        r.covar_ext[i] = p.covar;
        r.coes_ext[i] = p.coes;
    }
    r.coes_ext[3] = extrapolate_coes_from_intermediate(gm, r.coes_int, r.d);

    if (r.gamma1_hat >= 0.5) {
        std::ostringstream os;
        os << "gamma_hat=" << r.gamma1_hat << " >= 1/2: CoES variant 4 outside its limit theory";
        r.warnings.push_back({WarningCode::GammaAtLeastHalf, os.str()});
    }
    return r;
}

RiskEstimates estimate_all_averaged(const LossPairSample& sample, std::size_t k_min,
                                    std::size_t k_max, double tau_prime) {
    if (k_min < 1 || k_min > k_max)
        throw std::invalid_argument("estimate_all_averaged: need 1 <= k_min <= k_max");
    if (k_min == k_max) return estimate_all(sample, k_min, tau_prime);

    RiskEstimates acc;
    std::size_t count = 0;
    for (std::size_t k = k_min; k <= k_max; ++k) {
        RiskEstimates r = estimate_all(sample, k, tau_prime);
        if (count == 0) {
            acc = r;
        } else {
            acc.m += r.m;
            acc.d += r.d;
            acc.gamma1_hat += r.gamma1_hat;
            acc.var_x_hat += r.var_x_hat;
            acc.eta_hat_1 += r.eta_hat_1;
            acc.eta_hat_2 += r.eta_hat_2;
            acc.covar_int += r.covar_int;
            acc.coes_int += r.coes_int;
            for (std::size_t i = 0; i < 3; ++i) acc.covar_ext[i] += r.covar_ext[i];
            for (std::size_t i = 0; i < 4; ++i) acc.coes_ext[i] += r.coes_ext[i];
            for (auto& w : r.warnings)
                if (std::none_of(acc.warnings.begin(), acc.warnings.end(),
                                 [&](const Warning& have) { return have.code == w.code; }))
                    acc.warnings.push_back(std::move(w));
        }
        ++count;
    }
    const double c = static_cast<double>(count);
    // k and m report the range midpoint / mean; the estimates are plain means.
    acc.k = (k_min + k_max) / 2;
    acc.m = static_cast<std::size_t>(std::lround(static_cast<double>(acc.m) / c));
    acc.d /= c;
    acc.gamma1_hat /= c;
    acc.var_x_hat /= c;
    acc.eta_hat_1 /= c;
    acc.eta_hat_2 /= c;
    acc.covar_int /= c;
    acc.coes_int /= c;
    for (auto& v : acc.covar_ext) v /= c;
    for (auto& v : acc.coes_ext) v /= c;
    return acc;
}

}  // namespace tailrisk
