#include "conbatch/strategies.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "conbatch/rng.hpp"

namespace conbatch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_pool(const PredictiveCube* cube, const std::vector<int>& pool) {
    if (pool.empty()) throw std::invalid_argument("select_batch: empty pool");
    if (cube != nullptr && cube->n_points != static_cast<int>(pool.size()))
        throw std::invalid_argument("select_batch: cube/pool size mismatch");
    std::unordered_set<int> seen(pool.begin(), pool.end());
    if (seen.size() != pool.size())
        throw std::invalid_argument("select_batch: duplicate pool entries");
}

// Shared loop for the scored strategies. Thresholding additionally filters
// the budget-feasible set by c_th = remaining / (n_max - (i - 1)) and skips
// the step when that filter empties.
BatchResult scored_selection(const PredictiveCube& cube, const std::vector<int>& pool,
                             const CostModel& model, const Dataset& dataset, double budget,
                             int n_max, const ScoreOptions& opts, uint64_t seed,
                             bool use_threshold) {
    check_pool(&cube, pool);
    if (n_max < 1) throw std::invalid_argument("select_batch: n_max must be >= 1");
    if (!(budget > 0.0)) throw std::invalid_argument("select_batch: budget must be positive");

    BatchResult result;
    JointState state = make_initial_state(cube);
    TourContext tour;
    double remaining = budget;
    std::vector<char> taken(pool.size(), 0);
    std::vector<int> feasible, threshold_set;
    std::vector<double> costs(pool.size(), 0.0);

    for (int step = 1; step <= n_max; ++step) {
        if (static_cast<int>(result.selected.size()) >= n_max) break;

        StepDiag diag;
        diag.step = step;

        feasible.clear();
        for (size_t m = 0; m < pool.size(); ++m) {
            if (taken[m]) continue;
            ++diag.candidate_count;
            costs[m] = marginal_cost(model, tour, pool[m], dataset);
            if (costs[m] <= remaining) feasible.push_back(static_cast<int>(m));
        }
        diag.feasible_count = static_cast<int>(feasible.size());

        if (feasible.empty()) {
            diag.early_return = true;
            result.early_return = true;
            result.diagnostics.push_back(diag);
            break;
        }

        const std::vector<int>* contenders = &feasible;
        if (use_threshold) {
            const double c_th = remaining / static_cast<double>(n_max - (step - 1));
            diag.threshold = c_th;
            threshold_set.clear();
            for (int m : feasible)
                if (costs[m] <= c_th) threshold_set.push_back(m);
            if (threshold_set.empty()) {
                diag.skipped = true;
                ++result.skipped_steps;
                result.diagnostics.push_back(diag);
                continue;
            }
            contenders = &threshold_set;
        }

        const uint64_t step_seed = derive_seed(seed, static_cast<uint64_t>(step), "mi");
        const std::vector<double> scores =
            score_candidates(state, cube, *contenders, opts, step_seed);
        size_t best = 0;
        for (size_t ci = 1; ci < scores.size(); ++ci)
            if (scores[ci] > scores[best]) best = ci;

        const int m = (*contenders)[best];
        taken[m] = 1;
        diag.chosen = pool[m];
        diag.score = scores[best];
        diag.marginal_cost = costs[m];
        result.selected.push_back(pool[m]);
        result.step_costs.push_back(costs[m]);
        result.step_scores.push_back(scores[best]);
        result.total_cost += costs[m];
        remaining -= costs[m];
        tour.visit(pool[m]);
        state = accept_candidate(state, cube, m, opts);
        result.diagnostics.push_back(diag);
    }
    return result;
}

}  // namespace

BatchResult select_batch_threshold(const PredictiveCube& cube, const std::vector<int>& pool,
                                   const CostModel& model, const Dataset& dataset, double budget,
                                   int n_max, const ScoreOptions& opts, uint64_t seed) {
    return scored_selection(cube, pool, model, dataset, budget, n_max, opts, seed, true);
}

BatchResult select_batch_greedy(const PredictiveCube& cube, const std::vector<int>& pool,
                                const CostModel& model, const Dataset& dataset, double budget,
                                int n_max, const ScoreOptions& opts, uint64_t seed) {
    return scored_selection(cube, pool, model, dataset, budget, n_max, opts, seed, false);
}

BatchResult select_batch_random(const std::vector<int>& pool, const CostModel& model,
                                const Dataset& dataset, double budget, int n_max, uint64_t seed) {
    check_pool(nullptr, pool);
    if (n_max < 1) throw std::invalid_argument("select_batch: n_max must be >= 1");
    if (!(budget > 0.0)) throw std::invalid_argument("select_batch: budget must be positive");

    BatchResult result;
    TourContext tour;
    UniformRng rng(seed);
    double remaining = budget;
    std::vector<char> taken(pool.size(), 0);
    std::vector<int> feasible;
    std::vector<double> costs(pool.size(), 0.0);

    for (int step = 1; step <= n_max; ++step) {
        StepDiag diag;
        diag.step = step;

        feasible.clear();
        for (size_t m = 0; m < pool.size(); ++m) {
            if (taken[m]) continue;
            ++diag.candidate_count;
            costs[m] = marginal_cost(model, tour, pool[m], dataset);
            if (costs[m] <= remaining) feasible.push_back(static_cast<int>(m));
        }
        diag.feasible_count = static_cast<int>(feasible.size());

        if (feasible.empty()) {
            diag.early_return = true;
            result.early_return = true;
            result.diagnostics.push_back(diag);
            break;
        }

        const int m = feasible[rng.uniform_index(feasible.size())];
        taken[m] = 1;
        diag.chosen = pool[m];
        diag.marginal_cost = costs[m];
        result.selected.push_back(pool[m]);
        result.step_costs.push_back(costs[m]);
        result.total_cost += costs[m];
        remaining -= costs[m];
        tour.visit(pool[m]);
        result.diagnostics.push_back(diag);
    }
    return result;
}

BatchResult select_batch(StrategyKind kind, const PredictiveCube& cube,
                         const std::vector<int>& pool, const CostModel& model,
                         const Dataset& dataset, double budget, int n_max,
                         const ScoreOptions& opts, uint64_t seed) {
    switch (kind) {
        case StrategyKind::threshold:
            return select_batch_threshold(cube, pool, model, dataset, budget, n_max, opts, seed);
        case StrategyKind::greedy:
            return select_batch_greedy(cube, pool, model, dataset, budget, n_max, opts, seed);
        case StrategyKind::random_baseline:
            return select_batch_random(pool, model, dataset, budget, n_max, seed);
        case StrategyKind::batchbald_unconstrained:
            return select_batch_greedy(cube, pool, model, dataset, kInf, n_max, opts, seed);
    }
    throw std::logic_error("select_batch: unknown strategy");
}

StrategyKind strategy_from_string(const std::string& name) {
    if (name == "threshold") return StrategyKind::threshold;
    if (name == "greedy") return StrategyKind::greedy;
    if (name == "random") return StrategyKind::random_baseline;
    if (name == "batchbald") return StrategyKind::batchbald_unconstrained;
    throw std::invalid_argument("unknown strategy: " + name);
}

std::string to_string(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::threshold: return "threshold";
        case StrategyKind::greedy: return "greedy";
        case StrategyKind::random_baseline: return "random";
        case StrategyKind::batchbald_unconstrained: return "batchbald";
    }
    return "unknown";
}

}  // namespace conbatch
