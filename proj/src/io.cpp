#include "tailrisk/io.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "tailrisk/empirical.hpp"
#include "tailrisk/tail_copula.hpp"

namespace tailrisk {

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

namespace {

std::string trim(std::string s) {
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

bool is_iso_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    const int month = std::stoi(s.substr(5, 2));
    const int day = std::stoi(s.substr(8, 2));
    return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

double parse_double(const std::string& text, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument(what + ": '" + text + "' is not a number");
    }
    if (used != text.size()) throw std::invalid_argument(what + ": '" + text + "' is not a number");
    return v;
}

std::size_t parse_size(const std::string& text, const std::string& what) {
    if (text.empty() || !std::all_of(text.begin(), text.end(),
                                     [](unsigned char c) { return std::isdigit(c); }))
        throw std::invalid_argument(what + ": '" + text + "' is not a non-negative integer");
    return static_cast<std::size_t>(std::stoull(text));
}

}  // namespace

KRange parse_k_range(const std::string& text) {
    const auto colon = text.find(':');
    KRange r;
    if (colon == std::string::npos) {
        r.k_min = r.k_max = parse_size(trim(text), "k");
    } else {
        r.k_min = parse_size(trim(text.substr(0, colon)), "k range start");
        r.k_max = parse_size(trim(text.substr(colon + 1)), "k range end");
    }
    if (r.k_min < 1 || r.k_min > r.k_max)
        throw std::invalid_argument("k range must satisfy 1 <= k_min <= k_max");
    return r;
}

std::vector<double> parse_tau_grid(const std::string& text) {
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        for (std::string part; std::getline(ss, part, ':');) parts.push_back(trim(part));
        if (parts.size() != 3) throw std::invalid_argument("tau grid: expected start:stop:step");
        const double start = parse_double(parts[0], "tau grid start");
        const double stop = parse_double(parts[1], "tau grid stop");
        const double step = parse_double(parts[2], "tau grid step");
        if (!(step > 0.0) || stop < start) throw std::invalid_argument("tau grid: bad range");
        const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
        for (std::size_t i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
    } else {
        std::stringstream ss(text);
        for (std::string part; std::getline(ss, part, ',');)
            if (!trim(part).empty()) out.push_back(parse_double(trim(part), "tau grid"));
    }
    if (out.empty()) throw std::invalid_argument("tau grid is empty");
    for (double t : out)
        if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("tau grid: values must lie in (0,1)");
    return out;
}

ReturnSeries series_from_prices(std::vector<std::string> dates, std::vector<double> prices) {
    if (dates.size() != prices.size())
        throw std::invalid_argument("series: dates and prices differ in length");
    for (std::size_t i = 0; i < dates.size(); ++i) {
        if (!is_iso_date(dates[i]))
            throw std::invalid_argument("series: '" + dates[i] + "' is not an ISO-8601 date");
        if (!(prices[i] > 0.0) || !std::isfinite(prices[i]))
            throw std::invalid_argument("series: non-positive price on " + dates[i]);
        if (i > 0 && !(dates[i - 1] < dates[i]))
            throw std::invalid_argument("series: dates not strictly increasing at " + dates[i]);
    }
    ReturnSeries s;
    s.timestamps = std::move(dates);
    s.prices = std::move(prices);
    if (s.prices.size() >= 2) {
        s.losses.reserve(s.prices.size() - 1);
        for (std::size_t i = 0; i + 1 < s.prices.size(); ++i)
            s.losses.push_back(-std::log(s.prices[i + 1] / s.prices[i]));
    }
    return s;
}

ReturnSeries parse_price_csv(const std::string& text, const std::string& source) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> dates;
    std::vector<double> prices;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto comma = line.find(',');
        auto where = [&] { return source + ":" + std::to_string(lineno); };
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
            throw std::invalid_argument(where() + ": expected 'date,price'");
        const std::string date = trim(line.substr(0, comma));
        const std::string price = trim(line.substr(comma + 1));
        if (!header_seen) {
            header_seen = true;
            if (date == "date" && price == "price") continue;
            throw std::invalid_argument(where() + ": missing 'date,price' header");
        }
        if (!is_iso_date(date)) throw std::invalid_argument(where() + ": bad date '" + date + "'");
        dates.push_back(date);
        prices.push_back(parse_double(price, where() + " price"));
    }
    try {
        return series_from_prices(std::move(dates), std::move(prices));
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(source + ": " + e.what());
    }
}

ReturnSeries read_price_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_price_csv(ss.str(), path.string());
}

std::pair<ReturnSeries, ReturnSeries> align_pair(const ReturnSeries& x, const ReturnSeries& y) {
    std::vector<std::string> dates;
    std::vector<double> px, py;
    std::size_t i = 0, j = 0;
    while (i < x.timestamps.size() && j < y.timestamps.size()) {
        if (x.timestamps[i] < y.timestamps[j]) {
            ++i;
        } else if (y.timestamps[j] < x.timestamps[i]) {
            ++j;
        } else {
            dates.push_back(x.timestamps[i]);
            px.push_back(x.prices[i]);
            py.push_back(y.prices[j]);
            ++i;
            ++j;
        }
    }
    if (dates.empty()) throw std::invalid_argument("align_pair: empty intersection of dates");
    if (dates.size() < 2)
        throw std::invalid_argument("align_pair: fewer than 2 overlapping dates");
    auto dates_y = dates;
    return {series_from_prices(std::move(dates), std::move(px)),
            series_from_prices(std::move(dates_y), std::move(py))};
}

std::pair<ReturnSeries, ReturnSeries> load_pair_series(const std::filesystem::path& path_x,
                                                       const std::filesystem::path& path_y) {
    return align_pair(read_price_file(path_x), read_price_file(path_y));
}

LossPairSample loss_sample(const ReturnSeries& x, const ReturnSeries& y) {
    if (x.timestamps != y.timestamps)
        throw std::invalid_argument("loss_sample: series are not aligned");
    return LossPairSample(x.losses, y.losses);
}

std::size_t rolling_window_count(std::size_t series_length, std::size_t window, std::size_t step) {
    if (step < 1) throw std::invalid_argument("rolling: step must be >= 1");
    if (window < 2 || window > series_length)
        throw std::invalid_argument("rolling: window must satisfy 2 <= window <= series length");
    return (series_length - window) / step + 1;
}

std::vector<RollingPoint> rolling_estimates(const ReturnSeries& x, const ReturnSeries& y,
                                            const RollingPlan& plan, std::size_t threads) {
    if (x.timestamps != y.timestamps)
        throw std::invalid_argument("rolling: series are not aligned");
    const std::size_t total = x.losses.size();
    const std::size_t count = rolling_window_count(total, plan.window, plan.step);
    (void)validate_tail_config(plan.window, plan.k.k_max, plan.tau_prime);
    (void)validate_tail_config(plan.window, plan.k.k_min, plan.tau_prime);

    std::vector<RollingPoint> out(count);
    auto body = [&](std::size_t w) {
        const std::size_t end = plan.window + w * plan.step;  // 1-based, inclusive
        const std::size_t begin = end - plan.window;          // 0-based start
        RollingPoint& p = out[w];
        p.end_index = end;
        p.timestamp = x.timestamps[end];  // loss `end` is dated at price index `end`
        try {
            const LossPairSample sample(
                std::vector<double>(x.losses.begin() + begin, x.losses.begin() + end),
                std::vector<double>(y.losses.begin() + begin, y.losses.begin() + end));
            p.estimates = estimate_all_averaged(sample, plan.k.k_min, plan.k.k_max, plan.tau_prime);
        } catch (const EstimationError& e) {
            p.gap_reason = e.what();
        }
    };

    threads = std::max<std::size_t>(1, std::min(threads, count));
    if (threads == 1) {
        for (std::size_t w = 0; w < count; ++w) body(w);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t w; (w = next.fetch_add(1)) < count;) body(w);
        });
    for (auto& th : pool) th.join();
    return out;
}

DiagnosticsFiles diagnostics_export(const LossPairSample& sample, const KRange& k_range,
                                    const std::vector<double>& tau_grid,
                                    const std::filesystem::path& dir) {
    if (k_range.k_min < 1 || k_range.k_min > k_range.k_max)
        throw std::invalid_argument("diagnostics: empty k range");
    if (tau_grid.empty()) throw std::invalid_argument("diagnostics: empty tau grid");
    std::filesystem::create_directories(dir);

    const MarginIndex mx(sample.xs());
    const MarginIndex my(sample.ys());

    std::ostringstream hill;
    hill << "k\tgamma\tlo\thi\n";
    const HillCurve hc = hill_curve(mx, std::max<std::size_t>(2, k_range.k_min), k_range.k_max);
    for (std::size_t i = 0; i < hc.ks.size(); ++i)
        hill << hc.ks[i] << '\t' << format_number(hc.gammas[i]) << '\t'
             << format_number(hc.bands[i].first) << '\t' << format_number(hc.bands[i].second)
             << '\n';

    std::ostringstream tp;
    tp << "tau\tp_hat\tsquare\n";
    const TailProbCurve tc = tail_prob_curve(sample, tau_grid);
    for (std::size_t i = 0; i < tc.taus.size(); ++i)
        tp << format_number(tc.taus[i]) << '\t' << format_number(tc.p_hat[i]) << '\t'
           << format_number(tc.square[i]) << '\n';

    std::ostringstream r11;
    r11 << "k\tr_hat_1\tr_hat_2\n";
    for (std::size_t k = k_range.k_min; k <= k_range.k_max; ++k) {
        const TailCopulaEstimate e1(mx, my, k, TailVariant::Empirical);
        const TailCopulaEstimate e2(mx, my, k, TailVariant::Rank);
        r11 << k << '\t' << format_number(e1(1.0, 1.0)) << '\t' << format_number(e2(1.0, 1.0))
            << '\n';
    }

    DiagnosticsFiles files{dir / "hill.tsv", dir / "tailprob.tsv", dir / "r11.tsv"};
    write_text_file(files.hill, hill.str());
    write_text_file(files.tailprob, tp.str());
    write_text_file(files.r11, r11.str());
    return files;
}

nlohmann::json to_json(const RiskEstimates& r) {
    nlohmann::json j;
    j["n"] = r.n;
    j["k"] = r.k;
    j["m"] = r.m;
    j["tau_prime"] = r.tau_prime;
    j["d"] = r.d;
    j["gamma1_hat"] = r.gamma1_hat;
    j["var_x_hat"] = r.var_x_hat;
    j["eta_hat_1"] = r.eta_hat_1;
    j["eta_hat_2"] = r.eta_hat_2;
    j["covar_int"] = r.covar_int;
    j["coes_int"] = r.coes_int;
    for (std::size_t i = 0; i < 3; ++i) j["covar" + std::to_string(i + 1)] = r.covar_ext[i];
    for (std::size_t i = 0; i < 4; ++i) j["coes" + std::to_string(i + 1)] = r.coes_ext[i];
    auto& ws = j["warnings"] = nlohmann::json::array();
    for (const auto& w : r.warnings) ws.push_back({{"code", to_string(w.code)}, {"message", w.message}});
    return j;
}

std::string estimates_tsv_header() {
    return "n\tk\tm\ttau_prime\td\tgamma1_hat\tvar_x_hat\teta_hat_1\teta_hat_2\tcovar_int\t"
           "coes_int\tcovar1\tcovar2\tcovar3\tcoes1\tcoes2\tcoes3\tcoes4\twarnings";
}

std::string estimates_tsv_row(const RiskEstimates& r) {
    std::ostringstream os;
    os << r.n << '\t' << r.k << '\t' << r.m << '\t' << format_number(r.tau_prime) << '\t'
       << format_number(r.d) << '\t' << format_number(r.gamma1_hat) << '\t'
       << format_number(r.var_x_hat) << '\t' << format_number(r.eta_hat_1) << '\t'
       << format_number(r.eta_hat_2) << '\t' << format_number(r.covar_int) << '\t'
       << format_number(r.coes_int);
    for (double v : r.covar_ext) os << '\t' << format_number(v);
    for (double v : r.coes_ext) os << '\t' << format_number(v);
    os << '\t';
    for (std::size_t i = 0; i < r.warnings.size(); ++i)
        os << (i ? "," : "") << to_string(r.warnings[i].code);
    if (r.warnings.empty()) os << '-';
    return os.str();
}

ModelSpec model_spec_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("model: expected an object");
    for (const auto& [key, _] : j.items())
        if (key != "family" && key != "theta" && key != "nu" && key != "rho")
            throw std::invalid_argument("model: unknown field '" + key + "'");
    if (!j.contains("family") || !j["family"].is_string())
        throw std::invalid_argument("model: missing string field 'family'");
    const ModelFamily family = parse_family(j["family"].get<std::string>());

    auto number = [&](const char* key, double fallback) {
        if (!j.contains(key)) return fallback;
        if (!j[key].is_number()) throw std::invalid_argument(std::string("model: '") + key + "' must be a number");
        return j[key].get<double>();
    };
    auto reject = [&](const char* key) {
        if (j.contains(key))
            throw std::invalid_argument(std::string("model: field '") + key + "' does not apply to " +
                                        to_string(family));
    };

    switch (family) {
        case ModelFamily::Logistic:
            reject("nu");
            reject("rho");
            return ModelSpec::logistic(number("theta", 0.6));
        case ModelFamily::Cauchy:
            reject("theta");
            reject("nu");
            reject("rho");
            return ModelSpec::cauchy();
        case ModelFamily::Pareto2:
            reject("nu");
            reject("rho");
            return ModelSpec::pareto2(number("theta", 0.5));
        case ModelFamily::StudentT:
            reject("theta");
            return ModelSpec::student_t(number("nu", 1.5), number("rho", 0.3));
    }
    throw std::invalid_argument("model: unknown family");
}

nlohmann::json to_json(const ModelSpec& spec) {
    nlohmann::json j{{"family", to_string(spec.family)}};
    switch (spec.family) {
        case ModelFamily::Logistic:
        case ModelFamily::Pareto2: j["theta"] = spec.theta; break;
        case ModelFamily::StudentT:
            j["nu"] = spec.nu;
            j["rho"] = spec.rho;
            break;
        case ModelFamily::Cauchy: break;
    }
    return j;
}

std::vector<ExperimentPlan> plans_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("plan: expected an object");
    for (const auto& [key, _] : j.items())
        if (key != "seed" && key != "replications" && key != "experiments")
            throw std::invalid_argument("plan: unknown field '" + key + "'");
    const std::uint64_t seed = j.value("seed", std::uint64_t{0});
    const std::size_t reps = j.value("replications", std::size_t{100});
    if (!j.contains("experiments") || !j["experiments"].is_array() || j["experiments"].empty())
        throw std::invalid_argument("plan: 'experiments' must be a non-empty array");

    std::vector<ExperimentPlan> plans;
    for (const auto& e : j["experiments"]) {
        for (const auto& [key, _] : e.items())
            if (key != "model" && key != "n" && key != "k" && key != "tau_prime" && key != "seed" &&
                key != "replications")
                throw std::invalid_argument("plan experiment: unknown field '" + key + "'");
        for (const char* req : {"model", "n", "k", "tau_prime"})
            if (!e.contains(req))
                throw std::invalid_argument(std::string("plan experiment: missing '") + req + "'");
        ExperimentPlan p;
        p.spec = model_spec_from_json(e["model"]);
        p.n = e["n"].get<std::size_t>();
        p.k = e["k"].get<std::size_t>();
        p.tau_prime = e["tau_prime"].get<double>();
        p.seed = e.value("seed", seed);
        p.replications = e.value("replications", reps);
        p.validate();
        plans.push_back(p);
    }
    return plans;
}

std::vector<ExperimentPlan> read_plan_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open plan file '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument("plan file '" + path.string() + "': " + e.what());
    }
    return plans_from_json(j);
}

nlohmann::json to_json(const MsreTable& t) {
    nlohmann::json j;
    j["model"] = to_json(t.plan.spec);
    j["n"] = t.plan.n;
    j["k"] = t.plan.k;
    j["tau_prime"] = t.plan.tau_prime;
    j["replications"] = t.plan.replications;
    j["seed"] = t.plan.seed;
    j["true_covar"] = t.truth.covar;
    j["true_coes"] = t.truth.coes;
    j["oracle_tol"] = t.truth.abs_tol;
    auto& m = j["msre"] = nlohmann::json::object();
    for (std::size_t i = 0; i < kEstimatorNames.size(); ++i) m[kEstimatorNames[i]] = t.msre[i];
    j["failure_count"] = t.failure_count;
    j["failure_reasons"] = t.failure_reasons;
    j["warning_counts"] = t.warning_counts;
    return j;
}

std::string oracle_tsv_header() { return "family\ttau\tvar_y\tcovar\tcoes\ttol"; }

std::string oracle_tsv_row(const ModelSpec& spec, const OracleResult& r) {
    std::ostringstream os;
    char buf[48];
    os << to_string(spec.family) << '\t' << format_number(r.tau);
    for (double v : {r.var_y, r.covar, r.coes}) {
        std::snprintf(buf, sizeof buf, "%.12g", v);
        os << '\t' << buf;
    }
    std::snprintf(buf, sizeof buf, "%.3g", r.abs_tol);
    os << '\t' << buf;
    return os.str();
}

}  // namespace tailrisk
