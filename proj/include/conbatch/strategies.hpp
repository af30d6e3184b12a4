#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "conbatch/acquisition.hpp"
#include "conbatch/cost.hpp"
#include "conbatch/data.hpp"
#include "conbatch/posterior.hpp"

namespace conbatch {

enum class StrategyKind { threshold, greedy, random_baseline, batchbald_unconstrained };

struct StepDiag {
    int step = 0;  // 1-based, skipped steps included
    int candidate_count = 0;
    int feasible_count = 0;
    int chosen = -1;  // dataset row, -1 when nothing was acquired
    double score = 0.0;
    double marginal_cost = 0.0;
    double threshold = std::numeric_limits<double>::quiet_NaN();
    bool skipped = false;
    bool early_return = false;
};

struct BatchResult {
    std::vector<int> selected;  // dataset rows in acquisition order
    std::vector<double> step_costs;
    std::vector<double> step_scores;  // empty for the random baseline
    double total_cost = 0.0;
    bool early_return = false;
    int skipped_steps = 0;
    std::vector<StepDiag> diagnostics;
};

// The cube rows must correspond 1:1 with `pool` (cube point m describes
// dataset row pool[m]); pool entries must be distinct.

BatchResult select_batch_threshold(const PredictiveCube& cube, const std::vector<int>& pool,
                                   const CostModel& model, const Dataset& dataset, double budget,
                                   int n_max, const ScoreOptions& opts, uint64_t seed);

BatchResult select_batch_greedy(const PredictiveCube& cube, const std::vector<int>& pool,
                                const CostModel& model, const Dataset& dataset, double budget,
                                int n_max, const ScoreOptions& opts, uint64_t seed);

BatchResult select_batch_random(const std::vector<int>& pool, const CostModel& model,
                                const Dataset& dataset, double budget, int n_max, uint64_t seed);

// Dispatch; batchbald_unconstrained runs greedy with an infinite budget while
// still recording marginal costs under `model`.
BatchResult select_batch(StrategyKind kind, const PredictiveCube& cube,
                         const std::vector<int>& pool, const CostModel& model,
                         const Dataset& dataset, double budget, int n_max,
                         const ScoreOptions& opts, uint64_t seed);

StrategyKind strategy_from_string(const std::string& name);
std::string to_string(StrategyKind kind);

}  // namespace conbatch
