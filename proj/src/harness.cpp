#include "tailrisk/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <exception>
#include <mutex>
#include <thread>

namespace tailrisk {

void ExperimentPlan::validate() const {
    spec.validate();
    if (replications < 1) throw std::invalid_argument("ExperimentPlan: replications must be >= 1");
    (void)validate_tail_config(n, k, tau_prime);
}

double MsreTable::get(std::string_view estimator) const {
    for (std::size_t i = 0; i < kEstimatorNames.size(); ++i)
        if (estimator == kEstimatorNames[i]) return msre[i];
    throw std::invalid_argument("MsreTable: unknown estimator '" + std::string(estimator) + "'");
}

double msre(std::span<const double> estimates, double truth) {
    if (truth == 0.0) throw std::invalid_argument("msre: truth must be non-zero");
    if (estimates.empty()) throw std::invalid_argument("msre: no estimates");
    double acc = 0.0;
    for (double e : estimates) {
        const double r = e / truth - 1.0;
        acc += r * r;
    }
    return acc / static_cast<double>(estimates.size());
}

namespace {

struct Replication {
    std::optional<RiskEstimates> estimates;
    std::string failure;
};

Replication run_one(const ExperimentPlan& plan, std::size_t l) {
    RandomStream rng = RandomStream::substream(plan.seed, l);
    Replication out;
    try {
        const LossPairSample sample = sample_model(plan.spec, plan.n, rng);
        out.estimates = estimate_all(sample, plan.k, plan.tau_prime);
    } catch (const EstimationError& e) {
        out.failure = e.what();
    }
    return out;
}

// Runs body(l) for l = 1..count on up to `threads` workers; results land in
// slot l-1 so the reduction order never depends on scheduling.
template <class Body>
std::vector<Replication> run_replications(std::size_t count, std::size_t threads, Body body) {
    std::vector<Replication> results(count);
    threads = std::max<std::size_t>(1, std::min(threads, count));
    if (threads == 1) {
        for (std::size_t l = 1; l <= count; ++l) results[l - 1] = body(l);
        return results;
    }
    std::atomic<std::size_t> next{1};
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t l = next.fetch_add(1);
                if (l > count) return;
                try {
                    results[l - 1] = body(l);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
    return results;
}

std::array<double, 7> estimator_values(const RiskEstimates& r) {
    return {r.covar_ext[0], r.covar_ext[1], r.covar_ext[2], r.coes_ext[0],
            r.coes_ext[1],  r.coes_ext[2],  r.coes_ext[3]};
}

}  // namespace

MsreTable run_experiment(const ExperimentPlan& plan, const RunOptions& options) {
    plan.validate();
    MsreTable table;
    table.plan = plan;
    table.truth = options.cache ? options.cache->get(plan.spec, plan.tau_prime)
                                : oracle_point(plan.spec, plan.tau_prime);

    const auto reps = run_replications(plan.replications, options.threads,
                                       [&](std::size_t l) { return run_one(plan, l); });

    std::array<double, 7> acc{};
    std::size_t ok = 0;
    if (options.ratios_out) *options.ratios_out = {};
    for (std::size_t l = 1; l <= reps.size(); ++l) {
        const Replication& rep = reps[l - 1];
        if (!rep.estimates) {
            ++table.failure_count;
            // Keep the reason up to the first ':' so counts aggregate.
            const auto colon = rep.failure.find(':');
            ++table.failure_reasons[rep.failure.substr(0, colon)];
            continue;
        }
        ++ok;
        for (const auto& w : rep.estimates->warnings) ++table.warning_counts[to_string(w.code)];
        const auto values = estimator_values(*rep.estimates);
        std::array<double, 7> ratio{};
        for (std::size_t i = 0; i < 7; ++i) {
            const double truth = i < 3 ? table.truth.covar : table.truth.coes;
            ratio[i] = values[i] / truth;
            acc[i] += (ratio[i] - 1.0) * (ratio[i] - 1.0);
        }
        if (options.ratios_out) {
            options.ratios_out->replication.push_back(l);
            options.ratios_out->ratios.push_back(ratio);
        }
    }
    if (ok == 0) throw std::runtime_error("run_experiment: every replication failed");
    for (std::size_t i = 0; i < 7; ++i) table.msre[i] = acc[i] / static_cast<double>(ok);
    return table;
}

std::vector<MsreTable> run_grid(std::span<const ExperimentPlan> plans, const RunOptions& options) {
    if (plans.empty()) throw std::invalid_argument("run_grid: no plans");
    OracleCache local;
    RunOptions opts = options;
    if (!opts.cache) opts.cache = &local;
    opts.ratios_out = nullptr;
    std::vector<MsreTable> out;
    out.reserve(plans.size());
    for (const auto& p : plans) out.push_back(run_experiment(p, opts));
    return out;
}

namespace {

std::string fixed5(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.5f", v);
    return buf;
}

}  // namespace

std::string format_grid(std::span<const MsreTable> rows) {
    // Blocks keyed by (tau', n) in order of first appearance; the header lists
    // the distinct k values of the block.
    std::vector<std::pair<double, std::size_t>> blocks;
    for (const auto& r : rows) {
        const std::pair<double, std::size_t> key{r.plan.tau_prime, r.plan.n};
        if (std::find(blocks.begin(), blocks.end(), key) == blocks.end()) blocks.push_back(key);
    }

    std::ostringstream os;
    double current_tau = -1.0;
    for (const auto& [tau, n] : blocks) {
        if (tau != current_tau) {
            if (current_tau >= 0.0) os << "\n";
            os << "MSRE, tau' = " << tau << "\n";
            os << std::left << std::setw(16) << "";
            for (const char* name : kEstimatorNames) os << std::setw(10) << name;
            os << std::setw(8) << "fail" << "\n";
            current_tau = tau;
        }
        // k header: "k=90 for Bi-Student-t, k=120 for others" style when mixed.
        std::map<std::size_t, std::vector<std::string>> by_k;
        for (const auto& r : rows)
            if (r.plan.tau_prime == tau && r.plan.n == n)
                by_k[r.plan.k].push_back(r.plan.spec.display_name());
        os << "-- n=" << n << ", ";
        if (by_k.size() == 1) {
            os << "k=" << by_k.begin()->first;
        } else {
            bool first = true;
            for (const auto& [k, names] : by_k) {
                if (!first) os << "; ";
                os << "k=" << k << " for ";
                for (std::size_t i = 0; i < names.size(); ++i) os << (i ? "," : "") << names[i];
                first = false;
            }
        }
        os << "\n";
        for (const auto& r : rows) {
            if (r.plan.tau_prime != tau || r.plan.n != n) continue;
            os << std::left << std::setw(16) << r.plan.spec.display_name();
            for (double v : r.msre) os << std::setw(10) << fixed5(v);
            os << std::setw(8) << r.failure_count << "\n";
        }
    }
    return os.str();
}

std::string format_grid_tsv(std::span<const MsreTable> rows) {
    std::ostringstream os;
    os << "model\ttau_prime\tn\tk\treplications\tseed";
    for (const char* name : kEstimatorNames) os << '\t' << name;
    os << "\tfailures\ttrue_covar\ttrue_coes\n";
    char buf[64];
    for (const auto& r : rows) {
        os << to_string(r.plan.spec.family) << '\t' << r.plan.tau_prime << '\t' << r.plan.n << '\t'
           << r.plan.k << '\t' << r.plan.replications << '\t' << r.plan.seed;
        for (double v : r.msre) {
            std::snprintf(buf, sizeof buf, "%.10g", v);
            os << '\t' << buf;
        }
        os << '\t' << r.failure_count;
        std::snprintf(buf, sizeof buf, "%.12g", r.truth.covar);
        os << '\t' << buf;
        std::snprintf(buf, sizeof buf, "%.12g", r.truth.coes);
        os << '\t' << buf << '\n';
    }
    return os.str();
}

}  // namespace tailrisk
