#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>

#include "tailrisk/core.hpp"
#include "tailrisk/random.hpp"

namespace tailrisk {

enum class ModelFamily { Logistic, Cauchy, Pareto2, StudentT };

const char* to_string(ModelFamily family);
ModelFamily parse_family(std::string_view name);

/// One of the four transformed bivariate laws. X = Z1^x_exponent (or
/// |Z1|^x_exponent), Y = Z2 (or |Z2|).
struct ModelSpec {
    ModelFamily family = ModelFamily::Cauchy;
    double theta = 0.0;  // Logistic dependence / Pareto2 shape
    double nu = 0.0;     // StudentT degrees of freedom
    double rho = 0.0;    // StudentT correlation
    double x_exponent = 1.0;
    double gamma1 = 0.0;

    static ModelSpec logistic(double theta = 0.6);
    static ModelSpec cauchy();
    static ModelSpec pareto2(double theta = 0.5);
    static ModelSpec student_t(double nu = 1.5, double rho = 0.3);
    static ModelSpec defaults(ModelFamily family);

    /// Throws std::invalid_argument on out-of-range parameters.
    void validate() const;

    /// "Bi-Cauchy" etc.
    std::string display_name() const;

    bool operator==(const ModelSpec&) const = default;
};

std::pair<double, double> draw_pair(const ModelSpec& spec, RandomStream& rng);

/// n i.i.d. pairs (n >= 2).
LossPairSample sample_model(const ModelSpec& spec, std::size_t n, RandomStream& rng);

/// Analytic tail copula R(x, y).
double true_tail_copula(const ModelSpec& spec, double x, double y);

struct MarginalQuantiles {
    double var_x = 0.0;
    double var_y = 0.0;
};

MarginalQuantiles marginal_quantiles(const ModelSpec& spec, double tau);

/// P(X >= s) and P(Y >= t).
double marginal_survival_x(const ModelSpec& spec, double s);
double marginal_survival_y(const ModelSpec& spec, double t);

/// Map an X value back to the pre-transform margin: |Z1| = s^(1/x_exponent).
double untransform_x(const ModelSpec& spec, double s);

}  // namespace tailrisk
