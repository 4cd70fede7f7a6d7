#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

#include "tailrisk/models.hpp"
#include "tailrisk/oracle.hpp"
#include "tailrisk/random.hpp"

using namespace tailrisk;

namespace {
const ModelSpec kAll[] = {ModelSpec::logistic(), ModelSpec::cauchy(), ModelSpec::pareto2(),
                          ModelSpec::student_t()};
}

TEST_CASE("joint_survival anchors") {
    for (const auto& spec : kAll) CHECK(joint_survival(spec, 0, 0) == 1.0);
    CHECK(joint_survival(ModelSpec::pareto2(), 1, 0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
    CHECK(joint_survival(ModelSpec::logistic(), 0, 1) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
    CHECK_THROWS(joint_survival(ModelSpec::cauchy(), -1, 0));
    for (const auto& spec : kAll)
        for (double t : {0.5, 2.0, 50.0}) {
            // One-sided limits reduce to the margins.
            CHECK(joint_survival(spec, 0, t) == doctest::Approx(marginal_survival_y(spec, t)).epsilon(1e-9));
            CHECK(joint_survival(spec, std::pow(t, spec.x_exponent), 0) ==
                  doctest::Approx(marginal_survival_x(spec, std::pow(t, spec.x_exponent))).epsilon(1e-9));
        }
}

TEST_CASE("Pareto2 closed form agrees with 2-D density quadrature") {
    const ModelSpec p = ModelSpec::pareto2();
    double worst = 0.0;
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j) {
            const double s = 0.15 * i, t = 0.5 * j * j;
            worst = std::max(worst, std::abs(joint_survival(p, s, t) - joint_survival_by_density(p, s, t)));
        }
    CHECK(worst <= 1e-7);
}

TEST_CASE("conditional-t route agrees with 2-D density quadrature") {
    for (const auto& spec : {ModelSpec::cauchy(), ModelSpec::student_t()})
        for (double s : {0.3, 1.0, 2.5})
            for (double t : {0.2, 1.0, 8.0}) {
                INFO(spec.display_name() << " s=" << s << " t=" << t);
                CHECK(joint_survival(spec, s, t) ==
                      doctest::Approx(joint_survival_by_density(spec, s, t)).epsilon(1e-6));
            }
    CHECK_THROWS(joint_survival_by_density(ModelSpec::logistic(), 1, 1));
}

TEST_CASE("scaled joint tail probability converges to the analytic tail copula") {
    // t * P(Fbar_X(X) <= x/t, Fbar_Y(Y) <= y/t) -> R(x,y)
    for (const auto& spec : kAll)
        for (auto [x, y] : {std::pair{1.0, 1.0}, std::pair{0.5, 2.0}}) {
            const double t = 1e5;
            const double qx = marginal_quantiles(spec, 1.0 - x / t).var_x;
            const double qy = marginal_quantiles(spec, 1.0 - y / t).var_y;
            INFO(spec.display_name() << " x=" << x << " y=" << y);
            CHECK(t * joint_survival(spec, qx, qy) ==
                  doctest::Approx(true_tail_copula(spec, x, y)).epsilon(5e-3));
        }
}

TEST_CASE("true_covar") {
    const ModelSpec p = ModelSpec::pareto2();
    const double exact = std::pow(1e8 - 1e4, 1.0 / 6.0);
    CHECK(std::abs(true_covar(p, 0.99) / exact - 1.0) <= 1e-6);
    CHECK(true_covar(p, 0.99) == doctest::Approx(21.544).epsilon(1e-4));
    for (const auto& spec : kAll)
        for (double tau : {0.95, 0.99, 0.999}) {
            const double c = true_covar(spec, tau);
            CHECK(c >= marginal_quantiles(spec, tau).var_x);
            const double v = marginal_quantiles(spec, tau).var_y;
            CHECK(joint_survival(spec, c, v) == doctest::Approx((1 - tau) * (1 - tau)).epsilon(1e-7));
        }
    CHECK_THROWS(true_covar(p, 1.0));
}

TEST_CASE("true_coes") {
    const OracleResult r = oracle_point(ModelSpec::pareto2(), 0.99);
    CHECK(std::abs(r.coes / 32.32 - 1.0) <= 1e-3);
    // Dominant-term expansion c + 1e4/(2c^2).
    CHECK(r.coes == doctest::Approx(r.covar + 1e4 / (2.0 * r.covar * r.covar)).epsilon(1e-3));
    CHECK(r.var_y == doctest::Approx(9999.0));
    CHECK(r.abs_tol < 1e-6);
    for (const auto& spec : kAll) CHECK(true_coes(spec, 0.99) > true_covar(spec, 0.99));
}

TEST_CASE("CoES/CoVaR ratio approaches 1/(1-gamma)") {
    for (const auto& spec : kAll) {
        double prev_gap = INFINITY;
        for (double tau : {0.99, 0.995, 0.999, 0.9999}) {
            const OracleResult r = oracle_point(spec, tau);
            const double gap = std::abs(r.coes / r.covar - 1.5);
            INFO(spec.display_name() << " tau=" << tau << " ratio=" << r.coes / r.covar);
            CHECK(gap <= prev_gap + 1e-6);
            prev_gap = gap;
        }
        CHECK(prev_gap < 0.05);
    }
}

TEST_CASE("adjustment factor consistency") {
    for (const auto& spec : kAll) {
        double prev = INFINITY;
        for (double tau : {0.99, 0.999, 0.9999, 0.99999}) {
            const double eta = true_eta(spec, tau);
            CHECK(eta > 0.0);
            CHECK(eta < 1.0);
            const double dev = std::abs(eta_star(spec, tau) / eta - 1.0);
            INFO(spec.display_name() << " tau=" << tau << " dev=" << dev);
            CHECK(dev <= prev + 1e-9);
            prev = dev;
        }
        CHECK(prev < 0.02);
    }
}

TEST_CASE("Monte Carlo cross-check for Bi-Cauchy") {
    const ModelSpec c = ModelSpec::cauchy();
    const std::size_t draws = 100000000;
    const double v95 = marginal_quantiles(c, 0.95).var_y;
    const double v90 = marginal_quantiles(c, 0.90).var_y;
    const double c90 = true_covar(c, 0.90);
    std::vector<float> cond95;
    cond95.reserve(draws / 19);
    double sum90 = 0.0;
    std::size_t n90 = 0;
    RandomStream rng(20260101);
    for (std::size_t i = 0; i < draws; ++i) {
        const auto [x, y] = draw_pair(c, rng);
        if (y >= v95) cond95.push_back(static_cast<float>(x));
        if (y >= v90 && x >= c90) {
            sum90 += x;
            ++n90;
        }
    }
    // P(X >= c | Y >= v) = 1 - tau
    const std::size_t idx = static_cast<std::size_t>(std::llround(0.95 * static_cast<double>(cond95.size())));
    std::nth_element(cond95.begin(), cond95.begin() + static_cast<std::ptrdiff_t>(idx), cond95.end());
    const double mc_covar = cond95[idx];
    CHECK(mc_covar == doctest::Approx(true_covar(c, 0.95)).epsilon(1e-3));
    CHECK(sum90 / static_cast<double>(n90) == doctest::Approx(true_coes(c, 0.90)).epsilon(1e-2));
}

TEST_CASE("OracleCache memoizes per (model, level)") {
    OracleCache cache;
    const OracleResult a = cache.get(ModelSpec::pareto2(), 0.99);
    std::vector<std::thread> pool;
    std::vector<OracleResult> seen(8);
    for (int i = 0; i < 8; ++i)
        pool.emplace_back([&, i] { seen[static_cast<std::size_t>(i)] = cache.get(ModelSpec::pareto2(), 0.99); });
    for (auto& t : pool) t.join();
    for (const auto& s : seen) CHECK(s.coes == a.coes);
    CHECK(cache.size() == 1);
    cache.get(ModelSpec::pareto2(), 0.995);
    cache.get(ModelSpec::pareto2(0.7), 0.99);
    CHECK(cache.size() == 3);
}
