#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tailrisk/covar_coes.hpp"
#include "tailrisk/harness.hpp"
#include "tailrisk/models.hpp"
#include "tailrisk/oracle.hpp"

namespace tailrisk {

/// Dated prices and the weekly (or daily) losses -log(p[i+1]/p[i]). losses[i]
/// is dated timestamps[i+1].
struct ReturnSeries {
    std::vector<std::string> timestamps;  // ISO-8601 dates, strictly increasing
    std::vector<double> prices;
    std::vector<double> losses;
};

/// Inclusive k range; a single k has k_min == k_max.
struct KRange {
    std::size_t k_min = 0;
    std::size_t k_max = 0;
};

KRange parse_k_range(const std::string& text);

struct RollingPlan {
    std::size_t window = 1000;
    KRange k;
    double tau_prime = 0.99;
    std::size_t step = 1;
};

/// One output of the rolling driver. A failed window keeps its date and the
/// reason instead of estimates.
struct RollingPoint {
    std::string timestamp;
    std::size_t end_index = 0;  // 1-based index of the last loss in the window
    std::optional<RiskEstimates> estimates;
    std::string gap_reason;
};

ReturnSeries series_from_prices(std::vector<std::string> dates, std::vector<double> prices);

/// Parses a `date,price` file.
ReturnSeries read_price_file(const std::filesystem::path& path);
ReturnSeries parse_price_csv(const std::string& text, const std::string& source = "<memory>");

/// Restricts both price series to their common dates, then computes losses.
std::pair<ReturnSeries, ReturnSeries> align_pair(const ReturnSeries& x, const ReturnSeries& y);
std::pair<ReturnSeries, ReturnSeries> load_pair_series(const std::filesystem::path& path_x,
                                                       const std::filesystem::path& path_y);

LossPairSample loss_sample(const ReturnSeries& x, const ReturnSeries& y);

/// Number of windows for series length T: floor((T - window)/step) + 1.
std::size_t rolling_window_count(std::size_t series_length, std::size_t window, std::size_t step);

std::vector<RollingPoint> rolling_estimates(const ReturnSeries& x, const ReturnSeries& y,
                                            const RollingPlan& plan, std::size_t threads = 1);

struct DiagnosticsFiles {
    std::filesystem::path hill;
    std::filesystem::path tailprob;
    std::filesystem::path r11;
};

/// Writes hill.tsv, tailprob.tsv and r11.tsv into `dir`.
DiagnosticsFiles diagnostics_export(const LossPairSample& sample, const KRange& k_range,
                                    const std::vector<double>& tau_grid,
                                    const std::filesystem::path& dir);

/// "0.9:0.99:0.01" (inclusive, step) or "0.9,0.95,0.99".
std::vector<double> parse_tau_grid(const std::string& text);

// Serialization

nlohmann::json to_json(const RiskEstimates& r);
std::string estimates_tsv_header();
std::string estimates_tsv_row(const RiskEstimates& r);

/// {family, theta?, nu?, rho?}; unknown fields are rejected.
ModelSpec model_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ModelSpec& spec);

/// {"seed": u64, "replications": N, "experiments": [{"model": {...}, "n", "k",
/// "tau_prime", optional "seed"/"replications"}]}.
std::vector<ExperimentPlan> plans_from_json(const nlohmann::json& j);
std::vector<ExperimentPlan> read_plan_file(const std::filesystem::path& path);

nlohmann::json to_json(const MsreTable& t);

std::string oracle_tsv_header();
std::string oracle_tsv_row(const ModelSpec& spec, const OracleResult& r);

/// Fixed-format rendering used by every TSV writer ("%.10g").
std::string format_number(double v);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace tailrisk
