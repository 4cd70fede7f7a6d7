#include <doctest.h>

#include <cmath>
#include <numeric>

#include "tailrisk/empirical.hpp"
#include "tailrisk/models.hpp"
#include "tailrisk/random.hpp"

using namespace tailrisk;

namespace {
std::vector<double> one_to(int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 1.0);
    return v;
}
}  // namespace

TEST_CASE("hill_estimate examples") {
    CHECK(hill_estimate(MarginIndex(std::vector<double>{1, 5, 5, 5}), 2) == 0.0);
    CHECK(hill_estimate(MarginIndex(std::vector<double>{1, 2, 4, 8}), 2) ==
          doctest::Approx(1.5 * std::log(2.0)).epsilon(1e-14));
    CHECK(hill_estimate(MarginIndex(std::vector<double>{1, 2, 4, 8}), 2) ==
          doctest::Approx(1.03972).epsilon(1e-5));
}

TEST_CASE("hill_estimate errors") {
    CHECK_THROWS_AS(hill_estimate(MarginIndex(std::vector<double>{-3, -2, 0, 1}), 2),
                    EstimationError);
    CHECK_THROWS(hill_estimate(MarginIndex(one_to(8)), 0));
    CHECK_THROWS(hill_estimate(MarginIndex(one_to(8)), 8));
    // Non-positive values below the threshold are fine.
    CHECK_NOTHROW(hill_estimate(MarginIndex(std::vector<double>{-5, 0, 2, 3, 4}), 2));
}

TEST_CASE("hill_estimate on the transformed Pareto margin") {
    RandomStream rng(2023);
    const LossPairSample s = sample_model(ModelSpec::pareto2(), 100000, rng);
    CHECK(std::abs(hill_estimate(MarginIndex(s.xs()), 1000) - 1.0 / 3.0) <= 0.05);
}

TEST_CASE("empirical_var") {
    const MarginIndex m(one_to(8));
    CHECK(empirical_var(m, 4) == 4);
    CHECK(empirical_var(m, 1) == 7);
    CHECK(empirical_var(MarginIndex(std::vector<double>(6, 2.5)), 3) == 2.5);
    CHECK_THROWS(empirical_var(m, 8));
}

TEST_CASE("scale laws") {
    RandomStream rng(5);
    const LossPairSample s = sample_model(ModelSpec::cauchy(), 2000, rng);
    std::vector<double> scaled(s.xs().begin(), s.xs().end());
    for (auto& v : scaled) v *= 3.5;
    const MarginIndex a(s.xs()), b(scaled);
    for (std::size_t k : {10u, 100u, 500u}) {
        CHECK(hill_estimate(b, k) == doctest::Approx(hill_estimate(a, k)).epsilon(1e-12));
        CHECK(empirical_var(b, k) == 3.5 * empirical_var(a, k));
    }
}

TEST_CASE("tail_prob_curve") {
    const auto up = one_to(100);
    std::vector<double> down(up.rbegin(), up.rend());
    SUBCASE("comonotone") {
        const std::vector<double> taus{0.9};
        const TailProbCurve c = tail_prob_curve(LossPairSample(up, up), taus);
        CHECK(c.p_hat[0] == doctest::Approx(0.11));
        CHECK(c.square[0] == doctest::Approx(0.01));
    }
    SUBCASE("top order statistic only") {
        const std::vector<double> taus{0.995};
        const TailProbCurve c = tail_prob_curve(LossPairSample(up, up), taus);
        CHECK(c.p_hat[0] == doctest::Approx(0.01));
    }
    SUBCASE("anti-comonotone") {
        const std::vector<double> taus{0.9};
        CHECK(tail_prob_curve(LossPairSample(up, down), taus).p_hat[0] == 0.0);
    }
    SUBCASE("bad level") {
        const std::vector<double> taus{1.0};
        CHECK_THROWS(tail_prob_curve(LossPairSample(up, up), taus));
    }
    SUBCASE("lattice values, non-increasing in tau") {
        RandomStream rng(8);
        const LossPairSample s = sample_model(ModelSpec::logistic(), 400, rng);
        std::vector<double> taus;
        for (int i = 1; i < 100; ++i) taus.push_back(i / 100.0);
        const TailProbCurve c = tail_prob_curve(s, taus);
        for (std::size_t i = 0; i < taus.size(); ++i) {
            const double scaled = c.p_hat[i] * 400.0;
            CHECK(scaled == doctest::Approx(std::round(scaled)).epsilon(1e-12));
            CHECK(c.p_hat[i] >= 0.0);
            CHECK(c.p_hat[i] <= 1.0);
            if (i > 0) CHECK(c.p_hat[i] <= c.p_hat[i - 1]);
        }
    }
}

TEST_CASE("hill_curve") {
    const MarginIndex m(one_to(8));
    SUBCASE("single k equals the point estimate") {
        const HillCurve c = hill_curve(m, 3, 3);
        REQUIRE(c.gammas.size() == 1);
        CHECK(c.gammas[0] == hill_estimate(m, 3));
    }
    SUBCASE("values 1..8") {
        const HillCurve c = hill_curve(m, 2, 3);
        CHECK(c.ks == std::vector<std::size_t>{2, 3});
        CHECK(c.gammas[0] == doctest::Approx(0.5 * (std::log(8.0 / 6.0) + std::log(7.0 / 6.0))));
        CHECK(c.gammas[1] == doctest::Approx((std::log(1.6) + std::log(1.4) + std::log(1.2)) / 3.0));
        CHECK(c.gammas[1] == doctest::Approx(0.32960).epsilon(1e-4));
        CHECK(c.bands[0].first == doctest::Approx(c.gammas[0] * (1.0 - kHillBandZ / std::sqrt(2.0))));
        CHECK(c.bands[0].second == doctest::Approx(c.gammas[0] * (1.0 + kHillBandZ / std::sqrt(2.0))));
    }
    SUBCASE("exact Pareto quantile grid is flat at 1/3") {
        const int n = 20000;
        std::vector<double> q(n);
        for (int i = 0; i < n; ++i) q[i] = std::pow(1.0 - (i + 0.5) / n, -1.0 / 3.0);
        const HillCurve c = hill_curve(MarginIndex(q), 50, 500);
        for (double g : c.gammas) CHECK(g == doctest::Approx(1.0 / 3.0).epsilon(0.02));
    }
    SUBCASE("curve matches point estimates") {
        const HillCurve c = hill_curve(m, 2, 7);
        for (std::size_t i = 0; i < c.ks.size(); ++i) CHECK(c.gammas[i] == hill_estimate(m, c.ks[i]));
    }
    SUBCASE("invalid ranges") {
        CHECK_THROWS(hill_curve(m, 1, 3));
        CHECK_THROWS(hill_curve(m, 4, 3));
        CHECK_THROWS(hill_curve(m, 2, 8));
    }
}
