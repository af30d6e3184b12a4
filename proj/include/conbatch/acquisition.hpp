#pragma once

#include <cstdint>
#include <vector>

#include "conbatch/posterior.hpp"
#include "conbatch/types.hpp"

namespace conbatch {

// -sum p ln p in nats with 0 ln 0 := 0. Rejects negative entries and vectors
// that do not sum to 1 within 1e-6.
double entropy(const Eigen::RowVectorXd& p);

// (1/T) sum_t H(probs[m, t, .]).
double conditional_entropy_term(const PredictiveCube& cube, int m);

enum class JointMode { exact, sampled };

// Joint predictive state over the selected batch. In exact mode P is the
// K^i x T table of per-draw configuration probabilities; each column sums
// to 1. In sampled mode P is rebuilt per step from drawn configurations and
// the stored matrix stays empty between steps.
struct JointState {
    JointMode mode = JointMode::exact;
    MatrixXdR P;
    double cond_entropy_acc = 0.0;
    std::vector<int> selected;
};

JointState make_initial_state(const PredictiveCube& cube);

// K^batch_size <= cap, evaluated without overflow.
bool exact_within_cap(int n_classes, int batch_size, int cap);

// Appends candidate m: P'[(conf, c), t] = P[conf, t] * probs[m, t, c].
JointState extend_joint_exact(const JointState& state, const PredictiveCube& cube, int m);

// H = -sum_conf q ln q with q(conf) = (1/T) sum_t P[conf, t].
double joint_entropy_exact(const JointState& state);

// Shared per-step configuration draw: each of n_sim configurations samples a
// draw t uniformly, then y_j ~ probs[j, t, .] for every batch member. P holds
// the per-draw probabilities of each drawn configuration.
struct StepDraw {
    MatrixXdR P;            // n_sim x T
    Eigen::VectorXd p_hat;  // row means of P
};

StepDraw make_step_draw(const PredictiveCube& cube, const std::vector<int>& batch, int n_sim,
                        uint64_t seed);

// Importance-weighted joint entropy of batch + candidate m:
// -(1/n_sim) sum_s sum_c (q_sc / p_hat_s) ln q_sc with
// q_sc = (1/T) sum_t P[s,t] probs[m,t,c].
double joint_entropy_sampled(const StepDraw& draw, const PredictiveCube& cube, int m);
double joint_entropy_sampled(const JointState& state, const PredictiveCube& cube, int m,
                             int n_sim, uint64_t seed);

struct ScoreOptions {
    int exact_config_cap = 10000;
    int n_sim = 8000;
};

// Batch-MI scores for state + {x}: JointEntropy(state + x) minus the
// accumulated and candidate conditional terms. Uses the exact path while
// K^(i+1) fits under the cap, otherwise one shared configuration draw seeded
// by step_seed scores every candidate.
std::vector<double> score_candidates(const JointState& state, const PredictiveCube& cube,
                                     const std::vector<int>& candidates, const ScoreOptions& opts,
                                     uint64_t step_seed);

// Extends the state with an accepted candidate, switching to sampled mode
// when the exact table would exceed the cap.
JointState accept_candidate(JointState state, const PredictiveCube& cube, int m,
                            const ScoreOptions& opts);

// Post-hoc batch mutual information for an arbitrary batch (diagnostics for
// strategies that never scored it).
double batch_mutual_information(const PredictiveCube& cube, const std::vector<int>& batch,
                                const ScoreOptions& opts, uint64_t seed);

}  // namespace conbatch
