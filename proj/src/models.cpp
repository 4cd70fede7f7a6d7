#include "tailrisk/models.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "tailrisk/special.hpp"

namespace tailrisk {

const char* to_string(ModelFamily family) {
    switch (family) {
        case ModelFamily::Logistic: return "Logistic";
        case ModelFamily::Cauchy: return "Cauchy";
        case ModelFamily::Pareto2: return "Pareto2";
        case ModelFamily::StudentT: return "StudentT";
    }
    return "unknown";
}

ModelFamily parse_family(std::string_view name) {
    if (name == "Logistic") return ModelFamily::Logistic;
    if (name == "Cauchy") return ModelFamily::Cauchy;
    if (name == "Pareto2") return ModelFamily::Pareto2;
    if (name == "StudentT") return ModelFamily::StudentT;
    throw std::invalid_argument("unknown model family '" + std::string(name) +
                                "' (expected Logistic, Cauchy, Pareto2 or StudentT)");
}

ModelSpec ModelSpec::logistic(double theta) {
    ModelSpec s;
    s.family = ModelFamily::Logistic;
    s.theta = theta;
    s.x_exponent = 1.0 / 3.0;
    s.gamma1 = s.x_exponent;  // unit Frechet margin has index 1
    s.validate();
    return s;
}

ModelSpec ModelSpec::cauchy() {
    ModelSpec s;
    s.family = ModelFamily::Cauchy;
    s.x_exponent = 1.0 / 3.0;
    s.gamma1 = s.x_exponent;
    return s;
}

ModelSpec ModelSpec::pareto2(double theta) {
    ModelSpec s;
    s.family = ModelFamily::Pareto2;
    s.theta = theta;
    s.x_exponent = 1.0 / 6.0;
    s.validate();
    s.gamma1 = s.x_exponent / theta;  // margin survival (1+z)^(-theta)
    return s;
}

ModelSpec ModelSpec::student_t(double nu, double rho) {
    ModelSpec s;
    s.family = ModelFamily::StudentT;
    s.nu = nu;
    s.rho = rho;
    s.x_exponent = 0.5;
    s.validate();
    s.gamma1 = s.x_exponent / nu;
    return s;
}

ModelSpec ModelSpec::defaults(ModelFamily family) {
    switch (family) {
        case ModelFamily::Logistic: return logistic();
        case ModelFamily::Cauchy: return cauchy();
        case ModelFamily::Pareto2: return pareto2();
        case ModelFamily::StudentT: return student_t();
    }
    throw std::invalid_argument("ModelSpec::defaults: unknown family");
}

void ModelSpec::validate() const {
    switch (family) {
        case ModelFamily::Logistic:
            if (!(theta > 0.0 && theta <= 1.0))
                throw std::invalid_argument("Logistic: theta must lie in (0,1]");
            break;
        case ModelFamily::Cauchy: break;
        case ModelFamily::Pareto2:
            if (!(theta > 0.0)) throw std::invalid_argument("Pareto2: theta must be positive");
            break;
        case ModelFamily::StudentT:
            if (!(nu > 0.0)) throw std::invalid_argument("StudentT: nu must be positive");
            if (!(rho > 0.0 && rho < 1.0))
                throw std::invalid_argument("StudentT: rho must lie in (0,1)");
            break;
    }
    if (!(x_exponent > 0.0)) throw std::invalid_argument("ModelSpec: x_exponent must be positive");
}

std::string ModelSpec::display_name() const {
    switch (family) {
        case ModelFamily::Logistic: return "Bi-Logistic";
        case ModelFamily::Cauchy: return "Bi-Cauchy";
        case ModelFamily::Pareto2: return "Bi-Pareto";
        case ModelFamily::StudentT: return "Bi-Student-t";
    }
    return "unknown";
}

namespace {

// Positive stable variable with Laplace transform exp(-s^alpha), 0 < alpha < 1
// (Kanter's representation).
double positive_stable(double alpha, RandomStream& rng) {
    const double u = M_PI * rng.uniform_open();
    const double e = rng.exponential();
    return std::sin(alpha * u) / std::pow(std::sin(u), 1.0 / alpha) *
           std::pow(std::sin((1.0 - alpha) * u) / e, (1.0 - alpha) / alpha);
}

}  // namespace

std::pair<double, double> draw_pair(const ModelSpec& spec, RandomStream& rng) {
    switch (spec.family) {
        case ModelFamily::Logistic: {
            // P(Z1 <= s, Z2 <= t) = E exp(-S (s^(-1/theta) + t^(-1/theta)))
            const double s = spec.theta < 1.0 ? positive_stable(spec.theta, rng) : 1.0;
            const double z1 = std::pow(s / rng.exponential(), spec.theta);
            const double z2 = std::pow(s / rng.exponential(), spec.theta);
            return {std::pow(z1, spec.x_exponent), z2};
        }
        case ModelFamily::Cauchy: {
            const double n0 = std::fabs(rng.normal());
            const double z1 = rng.normal() / n0;
            const double z2 = rng.normal() / n0;
            return {std::pow(std::fabs(z1), spec.x_exponent), std::fabs(z2)};
        }
        case ModelFamily::Pareto2: {
            const double g = rng.gamma(spec.theta);
            const double z1 = rng.exponential() / g;
            const double z2 = rng.exponential() / g;
            return {std::pow(z1, spec.x_exponent), z2};
        }
        case ModelFamily::StudentT: {
            const double n1 = rng.normal();
            const double n2 = rng.normal();
            // chi-square(nu) as gamma(nu/2, scale 2)
            const double w = 2.0 * rng.gamma(0.5 * spec.nu);
            const double scale = 1.0 / std::sqrt(w / spec.nu);
            const double z1 = n1 * scale;
            const double z2 = (spec.rho * n1 + std::sqrt(1.0 - spec.rho * spec.rho) * n2) * scale;
            return {std::pow(std::fabs(z1), spec.x_exponent), std::fabs(z2)};
        }
    }
    throw std::invalid_argument("draw_pair: unknown family");
}

LossPairSample sample_model(const ModelSpec& spec, std::size_t n, RandomStream& rng) {
    spec.validate();
    if (n < 2) throw std::invalid_argument("sample_model: need n >= 2");
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto [x, y] = draw_pair(spec, rng);
        xs[i] = x;
        ys[i] = y;
    }
    return LossPairSample(std::move(xs), std::move(ys));
}

namespace {

// Tail copula of a bivariate t pair (Z1, Z2) with correlation rho.
double t_tail_copula(double nu, double rho, double x, double y) {
    const double c = std::sqrt((nu + 1.0) / (1.0 - rho * rho));
    const double ryx = std::pow(y / x, 1.0 / nu);
    const double rxy = 1.0 / ryx;
    return y * student_t_cdf(c * (rho - ryx), nu + 1.0) +
           x * student_t_cdf(c * (rho - rxy), nu + 1.0);
}

}  // namespace

double true_tail_copula(const ModelSpec& spec, double x, double y) {
    if (!(x >= 0.0) || !(y >= 0.0))
        throw std::invalid_argument("true_tail_copula: arguments must be non-negative");
    if (x == 0.0 || y == 0.0) return 0.0;

    switch (spec.family) {
        case ModelFamily::Logistic: {
            // x + y - (x^(1/theta) + y^(1/theta))^theta, written around the
            // larger argument to avoid cancellation.
            const double hi = std::max(x, y);
            const double lo = std::min(x, y);
            const double r = std::pow(lo / hi, 1.0 / spec.theta);
            return lo - hi * std::expm1(spec.theta * std::log1p(r));
        }
        case ModelFamily::Cauchy:
            // x + y - sqrt(x^2 + y^2)
            return 2.0 * x * y / (x + y + std::hypot(x, y));
        case ModelFamily::Pareto2: {
            const double p = 1.0 / spec.theta;
            return std::pow(std::pow(x, -p) + std::pow(y, -p), -spec.theta);
        }
        case ModelFamily::StudentT:
            // The model takes absolute values, so both the (Z1, Z2) and the
            // (Z1, -Z2) upper tails contribute.
            return t_tail_copula(spec.nu, spec.rho, x, y) +
                   t_tail_copula(spec.nu, -spec.rho, x, y);
    }
    throw std::invalid_argument("true_tail_copula: unknown family");
}

namespace {

// Survival of the pre-transform margin, P(Z >= z) or P(|Z| >= z).
double base_survival(const ModelSpec& spec, double z) {
    if (z <= 0.0) return 1.0;
    switch (spec.family) {
        case ModelFamily::Logistic: return -std::expm1(-1.0 / z);
        case ModelFamily::Cauchy: return 2.0 / M_PI * std::atan(1.0 / z);
        case ModelFamily::Pareto2: return std::pow(1.0 + z, -spec.theta);
        case ModelFamily::StudentT: return 2.0 * student_t_sf(z, spec.nu);
    }
    throw std::invalid_argument("unknown family");
}

// Upper (1 - tau) quantile of the pre-transform margin.
double base_quantile(const ModelSpec& spec, double tau) {
    const double p = 1.0 - tau;
    switch (spec.family) {
        case ModelFamily::Logistic: return -1.0 / std::log(tau);
        case ModelFamily::Cauchy: return 1.0 / std::tan(M_PI * p / 2.0);
        case ModelFamily::Pareto2: return std::expm1(-std::log(p) / spec.theta);
        case ModelFamily::StudentT: {
            // 2 * sf(t) = 1 - tau, bisection on a doubling bracket.
            constexpr double kRelTol = 1e-12;
            constexpr int kMaxIter = 200;
            double lo = 0.0, hi = 1.0;
            int guard = 0;
            while (2.0 * student_t_sf(hi, spec.nu) > p) {
                lo = hi;
                hi *= 2.0;
                if (++guard > 2000)
                    throw std::runtime_error("marginal_quantiles: bracketing failed");
            }
            for (int it = 0; it < kMaxIter; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (2.0 * student_t_sf(mid, spec.nu) > p)
                    lo = mid;
                else
                    hi = mid;
                if (hi - lo <= kRelTol * hi) return 0.5 * (lo + hi);
            }
            throw std::runtime_error("marginal_quantiles: root finder did not converge");
        }
    }
    throw std::invalid_argument("unknown family");
}

}  // namespace

MarginalQuantiles marginal_quantiles(const ModelSpec& spec, double tau) {
    if (!(tau > 0.0 && tau < 1.0))
        throw std::invalid_argument("marginal_quantiles: tau must lie in (0,1)");
    spec.validate();
    const double q = base_quantile(spec, tau);
    return {std::pow(q, spec.x_exponent), q};
}

double untransform_x(const ModelSpec& spec, double s) {
    return s <= 0.0 ? 0.0 : std::pow(s, 1.0 / spec.x_exponent);
}

double marginal_survival_x(const ModelSpec& spec, double s) {
    return base_survival(spec, untransform_x(spec, s));
}

double marginal_survival_y(const ModelSpec& spec, double t) { return base_survival(spec, t); }

}  // namespace tailrisk
