#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tailrisk/covar_coes.hpp"
#include "tailrisk/models.hpp"
#include "tailrisk/oracle.hpp"

namespace tailrisk {

inline constexpr std::array<const char*, 7> kEstimatorNames = {
    "covar1", "covar2", "covar3", "coes1", "coes2", "coes3", "coes4"};

struct ExperimentPlan {
    ModelSpec spec;
    std::size_t n = 0;
    std::size_t k = 0;
    double tau_prime = 0.99;
    std::size_t replications = 100;
    std::uint64_t seed = 0;

    void validate() const;
};

struct MsreTable {
    ExperimentPlan plan;
    OracleResult truth;
    std::array<double, 7> msre{};  // ordered as kEstimatorNames
    std::size_t failure_count = 0;
    std::map<std::string, std::size_t> warning_counts;
    std::map<std::string, std::size_t> failure_reasons;

    double get(std::string_view estimator) const;
};

/// Per-replication estimate / truth ratios; replications that failed are
/// absent.
struct RatioSamples {
    std::vector<std::size_t> replication;  // 1-based l
    std::vector<std::array<double, 7>> ratios;
};

struct RunOptions {
    std::size_t threads = 1;
    OracleCache* cache = nullptr;
    RatioSamples* ratios_out = nullptr;
};

/// (1/N) sum (estimate / truth - 1)^2.
double msre(std::span<const double> estimates, double truth);

MsreTable run_experiment(const ExperimentPlan& plan, const RunOptions& options = {});

std::vector<MsreTable> run_grid(std::span<const ExperimentPlan> plans,
                                const RunOptions& options = {});

/// Tables 1-3 layout: one block per (tau', n, k-header), one row per model.
std::string format_grid(std::span<const MsreTable> rows);

/// One line per experiment, tab separated, fixed column order.
std::string format_grid_tsv(std::span<const MsreTable> rows);

}  // namespace tailrisk
