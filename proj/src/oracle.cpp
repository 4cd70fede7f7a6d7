#include "tailrisk/oracle.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "tailrisk/special.hpp"

namespace tailrisk {

namespace {

constexpr double kQuadTol = 1e-12;
constexpr unsigned kMaxDepth = 15;

struct Integral {
    double value = 0.0;
    double error = 0.0;
};

template <class F>
Integral integrate(F f, double lo, double hi, double tol = kQuadTol) {
    using boost::math::quadrature::gauss_kronrod;
    double err = 0.0;
    double v = 0.0;
    if (std::isfinite(lo) && std::isfinite(hi)) {
        // The library's local error test is not scale invariant; map to [0,1].
        const double w = hi - lo;
        auto g = [&](double t) { return w * f(lo + w * t); };
        v = gauss_kronrod<double, 61>::integrate(g, 0.0, 1.0, kMaxDepth, tol, &err);
    } else {
        v = gauss_kronrod<double, 61>::integrate(f, lo, hi, kMaxDepth, tol, &err);
    }
    if (!std::isfinite(v)) throw std::runtime_error("oracle: quadrature produced a non-finite value");
    return {v, err};
}

// int_lo^inf f(z) dz with z = lo + L (t^-2 - 1): a tail decaying like z^-1.5
// becomes flat near t = 0, which the infinite-range mapping does not achieve.
template <class F>
Integral integrate_to_inf(F f, double lo, double tol = kQuadTol) {
    const double scale = 1.0 + std::abs(lo);
    auto g = [&](double t) {
        if (t <= 0.0) return 0.0;
        const double inv = 1.0 / (t * t);
        return f(lo + scale * (inv - 1.0)) * 2.0 * scale * inv / t;
    };
    return integrate(g, 0.0, 1.0, tol);
}

// Conditional-t representation of a bivariate t pair with correlation rho:
// given Z2 = z, (Z1 - rho z) / sigma(z) ~ t_{nu+1} with
// sigma(z)^2 = (nu + z^2)(1 - rho^2)/(nu + 1).
//
// Returns P(|Z1| >= a, |Z2| >= b) = 2 int_b^inf f_nu(z) [S((a - rho z)/sigma)
// + S((a + rho z)/sigma)] dz, S the t_{nu+1} survival.
Integral abs_t_survival(double nu, double rho, double a, double b) {
    const double one_m_r2 = 1.0 - rho * rho;
    auto bracket_at = [&](double inv_z, double z_for_small) {
        // Arguments written in 1/z so that z = inf is representable.
        double lo_arg, hi_arg;
        if (inv_z > 0.0 && z_for_small > 1.0) {
            const double denom = std::sqrt((nu * inv_z * inv_z + 1.0) * one_m_r2 / (nu + 1.0));
            lo_arg = (a * inv_z - rho) / denom;
            hi_arg = (a * inv_z + rho) / denom;
        } else if (inv_z == 0.0) {
            const double denom = std::sqrt(one_m_r2 / (nu + 1.0));
            lo_arg = -rho / denom;
            hi_arg = rho / denom;
        } else {
            const double z = z_for_small;
            const double sigma = std::sqrt((nu + z * z) * one_m_r2 / (nu + 1.0));
            lo_arg = (a - rho * z) / sigma;
            hi_arg = (a + rho * z) / sigma;
        }
        return student_t_sf(lo_arg, nu + 1.0) + student_t_sf(hi_arg, nu + 1.0);
    };

    Integral total;
    double start = b;
    if (b < 1.0) {
        auto body = [&](double z) { return student_t_pdf(z, nu) * bracket_at(1.0 / z, z); };
        const Integral near = integrate(body, b, 1.0);
        total.value += near.value;
        total.error += near.error;
        start = 1.0;
    }
    // z = start * u^(-1/nu) on u in (0, 1]; the Jacobian cancels the t tail
    // exactly, leaving K (1 + nu u^(2/nu) / start^2)^(-(nu+1)/2).
    const double log_c = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                         0.5 * std::log(nu * M_PI);
    const double kfac = std::exp(log_c + 0.5 * (nu - 1.0) * std::log(nu) - nu * std::log(start));
    auto tail = [&](double u) {
        const double inv_z = std::pow(u, 1.0 / nu) / start;
        const double z = inv_z > 0.0 ? 1.0 / inv_z : std::numeric_limits<double>::infinity();
        const double w = std::pow(1.0 + nu * inv_z * inv_z, -0.5 * (nu + 1.0));
        return kfac * w * bracket_at(inv_z, z);
    };
    // The bracket switches on around z ~ a; split there so the adaptive rule
    // does not chase a spike squeezed against u = 0.
    std::vector<double> cuts{0.0};
    for (double f : {64.0, 8.0, 1.0, 0.125}) {
        const double u = std::pow(start / (f * a), nu);
        if (u > cuts.back() && u < 1.0) cuts.push_back(u);
    }
    cuts.push_back(1.0);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const Integral far = integrate(tail, cuts[i], cuts[i + 1]);
        total.value += far.value;
        total.error += far.error;
    }

    total.value *= 2.0;
    total.error *= 2.0;
    return total;
}

Integral joint_survival_detail(const ModelSpec& spec, double s, double t) {
    if (!(s >= 0.0) || !(t >= 0.0))
        throw std::invalid_argument("joint_survival: arguments must be non-negative");
    const double a = untransform_x(spec, s);
    const double b = t;
    switch (spec.family) {
        case ModelFamily::Logistic: {
            if (a == 0.0 && b == 0.0) return {1.0, 0.0};
            if (a == 0.0) return {marginal_survival_y(spec, b), 0.0};
            if (b == 0.0) return {marginal_survival_y(spec, a), 0.0};
            // 1 - F1(a) - F2(b) + F(a, b), F = exp(-V), V = (a^-1/th + b^-1/th)^th
            const double ia = 1.0 / a;
            const double ib = 1.0 / b;
            const double p = 1.0 / spec.theta;
            const double v = std::pow(std::pow(ia, p) + std::pow(ib, p), spec.theta);
            return {-std::expm1(-ia) - std::expm1(-ib) + std::expm1(-v), 0.0};
        }
        case ModelFamily::Pareto2:
            return {std::pow(1.0 + a + b, -spec.theta), 0.0};
        case ModelFamily::Cauchy:
            if (a == 0.0 && b == 0.0) return {1.0, 0.0};
            return abs_t_survival(1.0, 0.0, a, b);
        case ModelFamily::StudentT:
            if (a == 0.0 && b == 0.0) return {1.0, 0.0};
            return abs_t_survival(spec.nu, spec.rho, a, b);
    }
    throw std::invalid_argument("joint_survival: unknown family");
}

}  // namespace

double joint_survival(const ModelSpec& spec, double s, double t) {
    return joint_survival_detail(spec, s, t).value;
}

double joint_survival_by_density(const ModelSpec& spec, double s, double t) {
    if (!(s >= 0.0) || !(t >= 0.0))
        throw std::invalid_argument("joint_survival_by_density: arguments must be non-negative");
    const double a = untransform_x(spec, s);
    const double b = t;
    constexpr double tol = 1e-11;

    switch (spec.family) {
        case ModelFamily::Pareto2: {
            const double th = spec.theta;
            auto inner = [&](double u) {
                auto dens = [&](double v) {
                    return th * (th + 1.0) * std::pow(1.0 + u + v, -(th + 2.0));
                };
                return integrate_to_inf(dens, b, tol).value;
            };
            return integrate_to_inf(inner, a, tol).value;
        }
        case ModelFamily::Cauchy:
        case ModelFamily::StudentT: {
            const double nu = spec.family == ModelFamily::Cauchy ? 1.0 : spec.nu;
            const double rho = spec.family == ModelFamily::Cauchy ? 0.0 : spec.rho;
            const double one_m_r2 = 1.0 - rho * rho;
            const double norm = std::exp(std::lgamma(0.5 * (nu + 2.0)) - std::lgamma(0.5 * nu)) /
                                (nu * M_PI * std::sqrt(one_m_r2));
            auto density = [&](double z1, double z2) {
                const double q = (z1 * z1 - 2.0 * rho * z1 * z2 + z2 * z2) / one_m_r2;
                return norm * std::pow(1.0 + q / nu, -0.5 * (nu + 2.0));
            };
            // Central symmetry: P(|Z1|>=a, |Z2|>=b) = 2 [P(Z1>=a, Z2>=b) + P(Z1>=a, Z2<=-b)].
            auto quadrant = [&](double sign) {
                auto inner = [&](double z1) {
                    auto f = [&](double z2) { return density(z1, sign * z2); };
                    return integrate_to_inf(f, b, tol).value;
                };
                return integrate_to_inf(inner, a, tol).value;
            };
            return 2.0 * (quadrant(1.0) + quadrant(-1.0));
        }
        case ModelFamily::Logistic:
            break;
    }
    throw std::invalid_argument("joint_survival_by_density: no density route for this family");
}

namespace {

struct CovarSolve {
    double value = 0.0;
    double width = 0.0;
    double var_y = 0.0;
};

CovarSolve solve_covar(const ModelSpec& spec, double tau, double rel_tol) {
    if (!(tau > 0.0 && tau < 1.0))
        throw std::invalid_argument("true_covar: tau must lie in (0,1)");
    spec.validate();
    const MarginalQuantiles q = marginal_quantiles(spec, tau);
    const double target = (1.0 - tau) * (1.0 - tau);
    auto excess = [&](double c) { return joint_survival(spec, c, q.var_y) - target; };

    double lo = q.var_x;
    if (!(excess(lo) > 0.0)) {
        std::ostringstream os;
        os << "true_covar: P(X >= VaR_X, Y >= VaR_Y) <= (1-tau)^2 at tau=" << tau
           << "; CoVaR does not exceed VaR_X";
        throw std::runtime_error(os.str());
    }
    double hi = 2.0 * lo;
    int guard = 0;
    while (excess(hi) > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (++guard > 200) throw std::runtime_error("true_covar: bracketing failed");
    }
    for (int it = 0; it < 400 && hi - lo > rel_tol * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (excess(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return {0.5 * (lo + hi), hi - lo, q.var_y};
}

Integral tail_integral(const ModelSpec& spec, double c, double var_y) {
    // int_c^inf S(s) ds with s = c/u: int_0^1 S(c/u, v) c / u^2 du
    auto f = [&](double u) {
        if (u <= 0.0) return 0.0;
        return joint_survival(spec, c / u, var_y) * c / (u * u);
    };
    return integrate(f, 0.0, 1.0, 1e-10);
}

}  // namespace

double true_covar(const ModelSpec& spec, double tau, double rel_tol) {
    return solve_covar(spec, tau, rel_tol).value;
}

double true_coes(const ModelSpec& spec, double tau) {
    return oracle_point(spec, tau).coes;
}

OracleResult oracle_point(const ModelSpec& spec, double tau) {
    const CovarSolve cv = solve_covar(spec, tau, 1e-12);
    const Integral tail = tail_integral(spec, cv.value, cv.var_y);
    const double scale = 1.0 / ((1.0 - tau) * (1.0 - tau));
    OracleResult r;
    r.tau = tau;
    r.var_y = cv.var_y;
    r.covar = cv.value;
    r.coes = cv.value + scale * tail.value;
    r.abs_tol = cv.width + scale * tail.error;
    return r;
}

double true_eta(const ModelSpec& spec, double tau) {
    return marginal_survival_x(spec, true_covar(spec, tau, 1e-12)) / (1.0 - tau);
}

double eta_star(const ModelSpec& spec, double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("eta_star: tau must lie in (0,1)");
    const double target = 1.0 - tau;
    if (true_tail_copula(spec, 1.0, 1.0) < target)
        throw std::runtime_error("eta_star: R(1,1) below 1 - tau, no solution in (0,1]");
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (true_tail_copula(spec, mid, 1.0) < target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

OracleResult OracleCache::get(const ModelSpec& spec, double tau) {
    const Key key{static_cast<int>(spec.family), spec.theta, spec.nu, spec.rho, tau};
    {
        std::shared_lock lock(mutex_);
        if (auto it = table_.find(key); it != table_.end()) return it->second;
    }
    const OracleResult r = oracle_point(spec, tau);
    std::unique_lock lock(mutex_);
    return table_.emplace(key, r).first->second;
}

std::size_t OracleCache::size() const {
    std::shared_lock lock(mutex_);
    return table_.size();
}

}  // namespace tailrisk
