#include "tailrisk/special.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tailrisk {

namespace {

// Continued fraction for I_x(a,b) (modified Lentz), valid for x < (a+1)/(a+b+2).
double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 500;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    throw std::runtime_error("regularized_beta: continued fraction did not converge");
}

double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

}  // namespace

double regularized_beta(double a, double b, double x, double y) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::invalid_argument("regularized_beta: a and b must be positive");
    if (!(x >= 0.0 && x <= 1.0))
        throw std::invalid_argument("regularized_beta: x must lie in [0,1]");
    if (x == 0.0) return 0.0;
    if (y == 0.0) return 1.0;

    const double front = std::exp(a * std::log(x) + b * std::log(y) - log_beta(a, b));
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, y) / b;
}

double regularized_beta(double a, double b, double x) {
    return regularized_beta(a, b, x, 1.0 - x);
}

double student_t_sf(double x, double nu) {
    if (!(nu > 0.0)) throw std::invalid_argument("student_t: nu must be positive");
    if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
    if (x == 0.0) return 0.5;
    if (std::isinf(x)) return x > 0 ? 0.0 : 1.0;

    // P(T > |x|) = I_t(nu/2, 1/2) / 2 with t = nu / (nu + x^2).
    const double x2 = x * x;
    const double t = nu / (nu + x2);
    const double s = x2 / (nu + x2);
    const double tail = 0.5 * regularized_beta(0.5 * nu, 0.5, t, s);
    return x > 0.0 ? tail : 1.0 - tail;
}

double student_t_cdf(double x, double nu) { return student_t_sf(-x, nu); }

double student_t_pdf(double x, double nu) {
    if (!(nu > 0.0)) throw std::invalid_argument("student_t: nu must be positive");
    const double logc = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                        0.5 * std::log(nu * M_PI);
    return std::exp(logc - 0.5 * (nu + 1.0) * std::log1p(x * x / nu));
}

}  // namespace tailrisk
