// tailrisk: extreme CoVaR / CoES estimation, simulation and diagnostics.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include "tailrisk/harness.hpp"
#include "tailrisk/io.hpp"
#include "tailrisk/oracle.hpp"

namespace fs = std::filesystem;
using namespace tailrisk;

namespace {

int cmd_simulate(const fs::path& plan_path, std::uint64_t seed, bool seed_given,
                 const fs::path& out_dir, std::size_t threads, bool ratios) {
    auto plans = read_plan_file(plan_path);
    if (seed_given)
        for (auto& p : plans) p.seed = seed;
    fs::create_directories(out_dir);

    OracleCache cache;
    RunOptions opts;
    opts.threads = threads;
    opts.cache = &cache;

    std::vector<MsreTable> tables;
    std::ostringstream ratio_tsv;
    ratio_tsv << "model\ttau_prime\tn\tk\treplication";
    for (const char* name : kEstimatorNames) ratio_tsv << '\t' << name;
    ratio_tsv << '\n';
    for (const auto& plan : plans) {
        RatioSamples samples;
        RunOptions o = opts;
        if (ratios) o.ratios_out = &samples;
        tables.push_back(run_experiment(plan, o));
        for (std::size_t i = 0; i < samples.replication.size(); ++i) {
            ratio_tsv << to_string(plan.spec.family) << '\t' << format_number(plan.tau_prime) << '\t'
                      << plan.n << '\t' << plan.k << '\t' << samples.replication[i];
            for (double r : samples.ratios[i]) ratio_tsv << '\t' << format_number(r);
            ratio_tsv << '\n';
        }
        std::cerr << "done: " << plan.spec.display_name() << " n=" << plan.n << " k=" << plan.k
                  << " tau'=" << plan.tau_prime << "\n";
    }

    nlohmann::json records = nlohmann::json::array();
    for (const auto& t : tables) records.push_back(to_json(t));

    const std::string table_text = format_grid(tables);
    write_text_file(out_dir / "msre.txt", table_text);
    write_text_file(out_dir / "msre.tsv", format_grid_tsv(tables));
    write_text_file(out_dir / "msre.json", records.dump(2) + "\n");
    if (ratios) write_text_file(out_dir / "ratios.tsv", ratio_tsv.str());
    std::cout << table_text;
    return 0;
}

int cmd_estimate(const fs::path& px, const fs::path& py, const std::string& k_text, double tau,
                 bool json) {
    const auto [x, y] = load_pair_series(px, py);
    const KRange k = parse_k_range(k_text);
    const RiskEstimates r =
        estimate_all_averaged(loss_sample(x, y), k.k_min, k.k_max, tau);
    if (json) {
        std::cout << to_json(r).dump(2) << "\n";
    } else {
        std::cout << estimates_tsv_header() << "\n" << estimates_tsv_row(r) << "\n";
    }
    for (const auto& w : r.warnings) std::cerr << "warning: " << w.message << "\n";
    return 0;
}

int cmd_diagnose(const fs::path& px, const fs::path& py, std::size_t kmin, std::size_t kmax,
                 const std::string& taugrid, const fs::path& out_dir) {
    const auto [x, y] = load_pair_series(px, py);
    const auto files =
        diagnostics_export(loss_sample(x, y), KRange{kmin, kmax}, parse_tau_grid(taugrid), out_dir);
    std::cout << files.hill.string() << "\n"
              << files.tailprob.string() << "\n"
              << files.r11.string() << "\n";
    return 0;
}

int cmd_rolling(const fs::path& px, const fs::path& py, std::size_t window,
                const std::string& k_text, double tau, std::size_t step, std::size_t threads,
                const std::string& out) {
    const auto [x, y] = load_pair_series(px, py);
    RollingPlan plan;
    plan.window = window;
    plan.k = parse_k_range(k_text);
    plan.tau_prime = tau;
    plan.step = step;
    const auto points = rolling_estimates(x, y, plan, threads);

    std::ostringstream os;
    os << "date\tend_index\tstatus\t" << estimates_tsv_header() << "\treason\n";
    const std::size_t empty_cols = 19;
    for (const auto& p : points) {
        os << p.timestamp << '\t' << p.end_index << '\t';
        if (p.estimates) {
            os << "ok\t" << estimates_tsv_row(*p.estimates) << "\t-\n";
        } else {
            os << "gap";
            for (std::size_t i = 0; i < empty_cols; ++i) os << "\tNA";
            os << '\t' << p.gap_reason << '\n';
        }
    }
    if (out.empty() || out == "-")
        std::cout << os.str();
    else
        write_text_file(out, os.str());
    return 0;
}

int cmd_oracle(const std::string& family, double tau, double theta, double nu, double rho,
               bool theta_set, bool nu_set, bool rho_set) {
    nlohmann::json j{{"family", family}};
    if (theta_set) j["theta"] = theta;
    if (nu_set) j["nu"] = nu;
    if (rho_set) j["rho"] = rho;
    const ModelSpec spec = model_spec_from_json(j);
    std::cout << oracle_tsv_header() << "\n" << oracle_tsv_row(spec, oracle_point(spec, tau)) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Extreme CoVaR / CoES under upper tail dependence"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Monte Carlo MSRE study from a plan file");
    fs::path plan_path, sim_out = "out";
    std::uint64_t seed = 0;
    std::size_t sim_threads = 1;
    bool ratios = false;
    sim->add_option("--plan", plan_path, "JSON plan file")->required()->check(CLI::ExistingFile);
    auto* seed_opt = sim->add_option("--seed", seed, "Overrides every experiment's seed");
    sim->add_option("--out", sim_out, "Output directory")->required();
    sim->add_option("--threads", sim_threads, "Worker threads")->check(CLI::PositiveNumber);
    sim->add_flag("--ratios", ratios, "Also write per-replication estimate/truth ratios");

    // estimate
    auto* est = app.add_subcommand("estimate", "Estimate CoVaR/CoES from two price files");
    fs::path ex, ey;
    std::string est_k;
    double est_tau = 0.99;
    bool est_json = false;
    est->add_option("--x", ex, "Institution prices (date,price)")->required()->check(CLI::ExistingFile);
    est->add_option("--y", ey, "System prices (date,price)")->required()->check(CLI::ExistingFile);
    est->add_option("--k", est_k, "Intermediate order k or range kmin:kmax")->required();
    est->add_option("--tau", est_tau, "Extreme level tau'")->required();
    est->add_flag("--json", est_json, "Emit JSON instead of TSV");

    // diagnose
    auto* dia = app.add_subcommand("diagnose", "Hill, tail-probability and R(1,1) curves");
    fs::path dx, dy, dia_out = ".";
    std::size_t kmin = 0, kmax = 0;
    std::string taugrid;
    dia->add_option("--x", dx, "Institution prices")->required()->check(CLI::ExistingFile);
    dia->add_option("--y", dy, "System prices")->required()->check(CLI::ExistingFile);
    dia->add_option("--kmin", kmin, "Smallest k")->required();
    dia->add_option("--kmax", kmax, "Largest k")->required();
    dia->add_option("--taugrid", taugrid, "start:stop:step or comma list")->required();
    dia->add_option("--out", dia_out, "Output directory");

    // rolling
    auto* rol = app.add_subcommand("rolling", "Moving-window estimates");
    fs::path rx, ry;
    std::size_t window = 1000, step = 1, rol_threads = 1;
    std::string rol_k, rol_out;
    double rol_tau = 0.99;
    rol->add_option("--x", rx, "Institution prices")->required()->check(CLI::ExistingFile);
    rol->add_option("--y", ry, "System prices")->required()->check(CLI::ExistingFile);
    rol->add_option("--window", window, "Window length in losses")->capture_default_str();
    rol->add_option("--k", rol_k, "k or kmin:kmax")->required();
    rol->add_option("--tau", rol_tau, "Extreme level tau'")->required();
    rol->add_option("--step", step, "Stride between windows")->capture_default_str();
    rol->add_option("--threads", rol_threads, "Worker threads")->check(CLI::PositiveNumber);
    rol->add_option("--out", rol_out, "Output TSV (default stdout)");

    // oracle
    auto* ora = app.add_subcommand("oracle", "True VaR_Y, CoVaR and CoES for a model");
    std::string family;
    double ora_tau = 0.99, theta = 0, nu = 0, rho = 0;
    ora->add_option("--model", family, "Logistic | Cauchy | Pareto2 | StudentT")->required();
    ora->add_option("--tau", ora_tau, "Level tau")->required();
    auto* theta_opt = ora->add_option("--theta", theta, "Logistic / Pareto2 parameter");
    auto* nu_opt = ora->add_option("--nu", nu, "StudentT degrees of freedom");
    auto* rho_opt = ora->add_option("--rho", rho, "StudentT correlation");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim) return cmd_simulate(plan_path, seed, seed_opt->count() > 0, sim_out, sim_threads, ratios);
        if (*est) return cmd_estimate(ex, ey, est_k, est_tau, est_json);
        if (*dia) return cmd_diagnose(dx, dy, kmin, kmax, taugrid, dia_out);
        if (*rol) return cmd_rolling(rx, ry, window, rol_k, rol_tau, step, rol_threads, rol_out);
        if (*ora)
            return cmd_oracle(family, ora_tau, theta, nu, rho, theta_opt->count() > 0,
                              nu_opt->count() > 0, rho_opt->count() > 0);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
