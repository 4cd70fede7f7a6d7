#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "tailrisk/io.hpp"
#include "tailrisk/models.hpp"
#include "tailrisk/random.hpp"

namespace fs = std::filesystem;
using namespace tailrisk;

namespace {

std::string iso(int day_index) {
    // Consecutive calendar days starting 2001-01-01, months of 28 days keep it simple.
    const int year = 2001 + day_index / (12 * 28);
    const int month = 1 + (day_index / 28) % 12;
    const int day = 1 + day_index % 28;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
}

std::string price_csv(const std::vector<double>& prices, int offset = 0) {
    std::ostringstream os;
    os << "date,price\n";
    for (std::size_t i = 0; i < prices.size(); ++i) os << iso(static_cast<int>(i) + offset) << ',' << format_number(prices[i]) << '\n';
    return os.str();
}

// Price paths whose losses follow a model sample.
std::pair<std::vector<double>, std::vector<double>> model_prices(std::size_t n, std::uint64_t seed) {
    RandomStream rng(seed);
    const LossPairSample s = sample_model(ModelSpec::cauchy(), n, rng);
    std::vector<double> px{100.0}, py{100.0};
    for (std::size_t i = 0; i < n; ++i) {
        px.push_back(px.back() * std::exp(-0.01 * s.xs()[i]));
        py.push_back(py.back() * std::exp(-0.001 * s.ys()[i]));
    }
    return {px, py};
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("tailrisk_io_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("losses are negative log returns") {
    const ReturnSeries s = parse_price_csv("date,price\n2020-01-03,100\n2020-01-10,90.4837\n");
    REQUIRE(s.losses.size() == 1);
    CHECK(s.losses[0] == doctest::Approx(0.1).epsilon(1e-5));
    const ReturnSeries flat = parse_price_csv(price_csv({5, 5, 5, 5}));
    for (double l : flat.losses) CHECK(l == 0.0);
}

TEST_CASE("price file validation") {
    CHECK_THROWS(parse_price_csv("2020-01-01,100\n2020-01-02,101\n"));
    CHECK_THROWS(parse_price_csv("date,price\n2020-01-01,100\n2020-01-02,-1\n"));
    CHECK_THROWS(parse_price_csv("date,price\n2020-01-01,100\n2020-01-02,abc\n"));
    CHECK_THROWS(parse_price_csv("date,price\n2020-01-02,100\n2020-01-01,101\n"));
    CHECK_THROWS(parse_price_csv("date,price\n2020/01/01,100\n"));
    CHECK_THROWS(parse_price_csv("date,price\n2020-01-01,100,7\n"));
    CHECK_NOTHROW(parse_price_csv("date,price\r\n2020-01-01,100\r\n2020-01-02,101\r\n"));
}

TEST_CASE("alignment on the date intersection") {
    const ReturnSeries a = parse_price_csv("date,price\n2020-01-01,1\n2020-01-02,2\n2020-01-03,4\n2020-01-05,8\n");
    const ReturnSeries b = parse_price_csv("date,price\n2020-01-02,10\n2020-01-03,20\n2020-01-04,30\n2020-01-05,40\n");
    const auto [x, y] = align_pair(a, b);
    CHECK(x.timestamps == std::vector<std::string>{"2020-01-02", "2020-01-03", "2020-01-05"});
    CHECK(y.timestamps == x.timestamps);
    CHECK(x.losses[1] == doctest::Approx(-std::log(2.0)));
    CHECK(y.losses[1] == doctest::Approx(-std::log(2.0)));

    const ReturnSeries later = parse_price_csv("date,price\n2021-01-01,1\n2021-01-02,2\n");
    try {
        align_pair(a, later);
        CHECK(false);
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("empty intersection") != std::string::npos);
    }
    const ReturnSeries touch = parse_price_csv("date,price\n2020-01-05,1\n2020-01-06,2\n");
    CHECK_THROWS(align_pair(a, touch));
}

TEST_CASE("window arithmetic") {
    CHECK(rolling_window_count(3821, 1000, 1) == 2822);
    CHECK(rolling_window_count(500, 500, 1) == 1);
    CHECK(rolling_window_count(500, 100, 500) == 1);
    std::mt19937_64 gen(4);
    for (int i = 0; i < 2000; ++i) {
        const std::size_t t = 2 + gen() % 5000;
        const std::size_t w = 2 + gen() % (t - 1);
        const std::size_t step = 1 + gen() % 700;
        std::size_t count = 0;
        for (std::size_t end = w; end <= t; end += step) ++count;
        CHECK(rolling_window_count(t, w, step) == count);
        CHECK(count == (t - w) / step + 1);
    }
}

TEST_CASE("rolling estimates") {
    const auto [px, py] = model_prices(700, 19);
    const ReturnSeries x = parse_price_csv(price_csv(px)), y = parse_price_csv(price_csv(py));
    RollingPlan plan;
    plan.window = 600;
    plan.k = {80, 80};
    plan.tau_prime = 0.99;
    plan.step = 25;
    const auto points = rolling_estimates(x, y, plan);
    REQUIRE(points.size() == rolling_window_count(700, 600, 25));
    CHECK(points.front().end_index == 600);
    CHECK(points.front().timestamp == x.timestamps[600]);
    for (std::size_t i = 1; i < points.size(); ++i) CHECK(points[i].timestamp > points[i - 1].timestamp);

    const auto threaded = rolling_estimates(x, y, plan, 4);
    for (std::size_t i = 0; i < points.size(); ++i) {
        REQUIRE(points[i].estimates.has_value() == threaded[i].estimates.has_value());
        if (points[i].estimates) CHECK(points[i].estimates->covar_ext == threaded[i].estimates->covar_ext);
    }

    SUBCASE("window equal to the series is the whole-sample estimate") {
        RollingPlan whole = plan;
        whole.window = 700;
        whole.step = 1;
        const auto one = rolling_estimates(x, y, whole);
        REQUIRE(one.size() == 1);
        REQUIRE(one[0].estimates.has_value());
        const RiskEstimates full = estimate_all(loss_sample(x, y), 80, 0.99);
        CHECK(one[0].estimates->covar_ext == full.covar_ext);
        CHECK(one[0].estimates->coes_ext == full.coes_ext);
    }
    SUBCASE("step equal to the length gives one window") {
        RollingPlan wide = plan;
        wide.step = 700;
        CHECK(rolling_estimates(x, y, wide).size() == 1);
    }
    SUBCASE("failing windows become gaps") {
        // Constant prices: all losses 0, Hill threshold is not positive.
        std::vector<double> flat(701, 50.0);
        const ReturnSeries fx = parse_price_csv(price_csv(flat));
        const auto gaps = rolling_estimates(fx, y, plan);
        REQUIRE(gaps.size() == points.size());
        for (const auto& g : gaps) {
            CHECK_FALSE(g.estimates.has_value());
            CHECK_FALSE(g.gap_reason.empty());
        }
    }
    SUBCASE("shifting both files by the same dates changes nothing") {
        const auto [sx, sy] = align_pair(parse_price_csv(price_csv(px, 90)), parse_price_csv(price_csv(py, 90)));
        const auto shifted = rolling_estimates(sx, sy, plan);
        REQUIRE(shifted.size() == points.size());
        for (std::size_t i = 0; i < points.size(); ++i) {
            CHECK(shifted[i].end_index == points[i].end_index);
            if (points[i].estimates) CHECK(shifted[i].estimates->coes_ext == points[i].estimates->coes_ext);
        }
        CHECK(sx.losses == x.losses);
    }
    SUBCASE("invalid plans") {
        RollingPlan bad = plan;
        bad.window = 701;
        CHECK_THROWS(rolling_estimates(x, y, bad));
        bad = plan;
        bad.step = 0;
        CHECK_THROWS(rolling_estimates(x, y, bad));
    }
}

TEST_CASE("k ranges and tau grids") {
    CHECK(parse_k_range("90").k_min == 90);
    CHECK(parse_k_range("90").k_max == 90);
    CHECK(parse_k_range("80:100").k_max == 100);
    CHECK_THROWS(parse_k_range("100:80"));
    CHECK_THROWS(parse_k_range("x"));
    const auto g = parse_tau_grid("0.9:0.99:0.01");
    CHECK(g.size() == 10);
    CHECK(g.back() == doctest::Approx(0.99));
    CHECK(parse_tau_grid("0.95,0.99").size() == 2);
    CHECK_THROWS(parse_tau_grid("0.5:1.5:0.1"));
}

TEST_CASE("diagnostics export") {
    std::vector<double> up(400), down(400);
    for (int i = 0; i < 400; ++i) {
        up[i] = i + 1.0;
        down[i] = 400.0 - i;
    }
    const std::vector<double> taus{0.9, 0.95};
    SUBCASE("comonotone") {
        const fs::path dir = scratch("diag_co");
        const auto files = diagnostics_export(LossPairSample(up, up), {10, 100}, taus, dir);
        std::ifstream in(files.r11);
        std::string line;
        std::getline(in, line);
        int rows = 0;
        while (std::getline(in, line)) {
            std::istringstream ls(line);
            double k, r1, r2;
            ls >> k >> r1 >> r2;
            CHECK(r1 >= 0.9);
            CHECK(r2 >= 0.9);
            ++rows;
        }
        CHECK(rows == 91);
        CHECK(fs::exists(files.hill));
        CHECK(fs::exists(files.tailprob));
    }
    SUBCASE("anti-comonotone") {
        const fs::path dir = scratch("diag_anti");
        const auto files = diagnostics_export(LossPairSample(up, down), {10, 100}, taus, dir);
        std::ifstream in(files.r11);
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            std::istringstream ls(line);
            double k, r1, r2;
            ls >> k >> r1 >> r2;
            CHECK(r1 <= 0.02);
            CHECK(r2 == 0.0);
        }
    }
    SUBCASE("empty k range") {
        CHECK_THROWS(diagnostics_export(LossPairSample(up, up), {10, 5}, taus, scratch("diag_bad")));
    }
}

TEST_CASE("serialization") {
    CHECK(model_spec_from_json(nlohmann::json{{"family", "Pareto2"}, {"theta", 0.5}}) == ModelSpec::pareto2());
    CHECK(model_spec_from_json(nlohmann::json{{"family", "StudentT"}}) == ModelSpec::student_t());
    CHECK_THROWS(model_spec_from_json(nlohmann::json{{"family", "Cauchy"}, {"theta", 0.5}}));
    CHECK_THROWS(model_spec_from_json(nlohmann::json{{"family", "Logistic"}, {"colour", 1}}));
    CHECK_THROWS(model_spec_from_json(nlohmann::json{{"theta", 0.5}}));
    for (ModelFamily f : {ModelFamily::Logistic, ModelFamily::Cauchy, ModelFamily::Pareto2, ModelFamily::StudentT})
        CHECK(model_spec_from_json(to_json(ModelSpec::defaults(f))) == ModelSpec::defaults(f));

    const auto plans = plans_from_json(nlohmann::json::parse(R"({
        "seed": 5, "replications": 20,
        "experiments": [
          {"model": {"family": "Cauchy"}, "n": 2000, "k": 250, "tau_prime": 0.99},
          {"model": {"family": "Logistic", "theta": 0.6}, "n": 500, "k": 120, "tau_prime": 0.995, "seed": 9, "replications": 3}
        ]})"));
    REQUIRE(plans.size() == 2);
    CHECK(plans[0].seed == 5);
    CHECK(plans[0].replications == 20);
    CHECK(plans[1].seed == 9);
    CHECK(plans[1].replications == 3);
    CHECK_THROWS(plans_from_json(nlohmann::json::parse(R"({"experiments": [{"model": {"family": "Cauchy"}, "n": 10}]})")));
    CHECK_THROWS(plans_from_json(nlohmann::json::parse(R"({"experiments": [], "extra": 1})")));

    RandomStream rng(1);
    const RiskEstimates r = estimate_all(sample_model(ModelSpec::cauchy(), 1000, rng), 150, 0.99);
    const nlohmann::json j = to_json(r);
    for (const char* key : {"covar1", "covar2", "covar3", "coes1", "coes2", "coes3", "coes4"}) CHECK(j.contains(key));
    CHECK(j["covar1"].get<double>() == r.covar_ext[0]);
    const std::string header = estimates_tsv_header(), row = estimates_tsv_row(r);
    CHECK(std::count(header.begin(), header.end(), '\t') == std::count(row.begin(), row.end(), '\t'));
    CHECK(header.find("covar1") != std::string::npos);
}

TEST_CASE("files round-trip through disk") {
    const fs::path dir = scratch("files");
    const auto [px, py] = model_prices(300, 3);
    write_text_file(dir / "x.csv", price_csv(px));
    write_text_file(dir / "y.csv", price_csv(py));
    const auto [x, y] = load_pair_series(dir / "x.csv", dir / "y.csv");
    CHECK(x.losses.size() == 300);
    CHECK_THROWS(read_price_file(dir / "missing.csv"));
}
