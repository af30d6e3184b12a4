#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "conbatch/cost.hpp"
#include "conbatch/neural.hpp"
#include "conbatch/strategies.hpp"
#include "conbatch/synth.hpp"
#include "json.hpp"

namespace conbatch {

struct RunConfig {
    std::string dataset_dir;          // exactly one of dataset_dir / synth
    std::optional<SynthSpec> synth;
    uint64_t synth_seed = 1;          // dataset generation seed, fixed across run seeds

    StrategyKind strategy = StrategyKind::greedy;
    CostVariant cost_variant = CostVariant::none;
    DistanceMetric metric = DistanceMetric::haversine;
    std::string area_costs_file;      // optional override for area_cost
    double budget = std::numeric_limits<double>::infinity();  // per batch
    int n_max = 5;
    int iterations = 800;
    int n_draws = 100;                // T forward passes
    int exact_config_cap = 10000;
    int n_sim = 8000;
    ModelConfig model;                // input_dim/class_count resolved from data

    int eval_stride = 1;
    double stop_at_accuracy = 0.0;    // 0 disables early stopping
    bool record_timing = true;        // false pins wall_ms to 0 for byte-stable output
};

struct IterationRecord {
    int iteration = 0;  // 1-based
    double test_accuracy = std::numeric_limits<double>::quiet_NaN();  // NaN when stride skips
    std::vector<int> batch_indices;
    std::vector<double> batch_marginal_costs;
    double batch_total_cost = 0.0;
    double batch_mutual_information = 0.0;
    int batch_size = 0;
    long cumulative_samples = 0;
    double cumulative_cost = 0.0;
    int train_size = 0;
    double wall_ms = 0.0;
};

struct RunSeries {
    nlohmann::json config;  // echo, sufficient to re-run
    uint64_t seed = 0;
    std::vector<IterationRecord> records;
    bool pool_exhausted = false;
    bool stopped_early = false;
    bool aborted = false;
    std::string abort_reason;
};

void validate_run_config(const RunConfig& config);

// Full active-learning loop for one seed: per iteration train from scratch,
// sample the posterior over pool and test set, select a batch with a fresh
// budget, acquire, record. Training divergence aborts with a partial series.
RunSeries run_experiment(const RunConfig& config, uint64_t seed);

nlohmann::json run_config_to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& j);

nlohmann::json series_to_json(const RunSeries& series);
RunSeries series_from_json(const nlohmann::json& j);

// <strategy>_<cost>_<budget>_seed<k>.json
std::string result_filename(const RunConfig& config, uint64_t seed);

// Atomic write (temp file + rename).
void write_series(const RunSeries& series, const std::filesystem::path& path);
RunSeries load_series(const std::filesystem::path& path);

std::optional<int> iterations_to_target(const RunSeries& series, double target_acc);

struct SamplesCost {
    long samples = 0;
    double cost = 0.0;
};
std::optional<SamplesCost> samples_and_cost_to_target(const RunSeries& series, double target_acc);

}  // namespace conbatch
