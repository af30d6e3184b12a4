#include "conbatch/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "conbatch/rng.hpp"

namespace conbatch {

namespace {

// Elementwise q ln q with zeros passed through.
inline Eigen::ArrayXXd plogp(const Eigen::ArrayXXd& q) {
    return (q > 0.0).select(q * q.log(), 0.0);
}

void check_point(const PredictiveCube& cube, int m) {
    if (m < 0 || m >= cube.n_points)
        throw std::invalid_argument("cube point index out of range");
}

// Stacks the T x K blocks of `points` side by side for one GEMM.
MatrixXdR stack_blocks(const PredictiveCube& cube, const std::vector<int>& points, size_t first,
                       size_t count) {
    MatrixXdR b(cube.n_draws, static_cast<Eigen::Index>(count) * cube.n_classes);
    for (size_t i = 0; i < count; ++i)
        b.middleCols(static_cast<Eigen::Index>(i) * cube.n_classes, cube.n_classes) =
            cube.block(points[first + i]);
    return b;
}

constexpr Eigen::Index kChunkElementBudget = 4'000'000;

}  // namespace

double entropy(const Eigen::RowVectorXd& p) {
    double sum = 0.0;
    double h = 0.0;
    for (Eigen::Index c = 0; c < p.size(); ++c) {
        const double v = p(c);
        if (v < 0.0) throw std::invalid_argument("entropy: negative probability entry");
        sum += v;
        if (v > 0.0) h -= v * std::log(v);
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw std::invalid_argument("entropy: probabilities must sum to 1");
    return h;
}

double conditional_entropy_term(const PredictiveCube& cube, int m) {
    check_point(cube, m);
    double acc = 0.0;
    for (int t = 0; t < cube.n_draws; ++t) {
        const auto row = cube.row(m, t);
        for (int c = 0; c < cube.n_classes; ++c) {
            const double v = row(c);
            if (v > 0.0) acc -= v * std::log(v);
        }
    }
    return acc / cube.n_draws;
}

JointState make_initial_state(const PredictiveCube& cube) {
    JointState state;
    state.P = MatrixXdR::Ones(1, cube.n_draws);
    return state;
}

bool exact_within_cap(int n_classes, int batch_size, int cap) {
    long long configs = 1;
    for (int i = 0; i < batch_size; ++i) {
        configs *= n_classes;
        if (configs > cap) return false;
    }
    return configs <= cap;
}

JointState extend_joint_exact(const JointState& state, const PredictiveCube& cube, int m) {
    if (state.mode != JointMode::exact)
        throw std::logic_error("extend_joint_exact: state is not in exact mode");
    check_point(cube, m);
    const Eigen::Index c_old = state.P.rows();
    const int k = cube.n_classes;
    const int t_draws = cube.n_draws;

    JointState next;
    next.mode = JointMode::exact;
    next.P.resize(c_old * k, t_draws);
    const auto block = cube.block(m);
    for (Eigen::Index conf = 0; conf < c_old; ++conf)
        for (int c = 0; c < k; ++c)
            next.P.row(conf * k + c) =
                state.P.row(conf).cwiseProduct(block.col(c).transpose());
    next.cond_entropy_acc = state.cond_entropy_acc + conditional_entropy_term(cube, m);
    next.selected = state.selected;
    next.selected.push_back(m);
    return next;
}

double joint_entropy_exact(const JointState& state) {
    if (state.mode != JointMode::exact)
        throw std::logic_error("joint_entropy_exact: state is not in exact mode");
    const Eigen::ArrayXd q = state.P.rowwise().mean().array();
    return -((q > 0.0).select(q * q.log(), 0.0)).sum();
}

StepDraw make_step_draw(const PredictiveCube& cube, const std::vector<int>& batch, int n_sim,
                        uint64_t seed) {
    if (n_sim <= 0) throw std::invalid_argument("make_step_draw: n_sim must be positive");
    const int t_draws = cube.n_draws;
    const int k = cube.n_classes;

    StepDraw draw;
    if (batch.empty()) {
        // Single dummy configuration with probability 1: the estimator then
        // reduces to the exact entropy of the predictive mean.
        draw.P = MatrixXdR::Ones(1, t_draws);
        draw.p_hat = Eigen::VectorXd::Ones(1);
        return draw;
    }

    UniformRng rng(seed);
    draw.P = MatrixXdR::Ones(n_sim, t_draws);
    std::vector<int> config(batch.size());
    for (int s = 0; s < n_sim; ++s) {
        const int t = static_cast<int>(rng.uniform_index(static_cast<uint64_t>(t_draws)));
        for (size_t j = 0; j < batch.size(); ++j) {
            const auto row = cube.row(batch[j], t);
            const double u = rng.uniform();
            double cum = 0.0;
            int pick = -1;
            for (int c = 0; c < k; ++c) {
                if (row(c) <= 0.0) continue;
                cum += row(c);
                pick = c;
                if (u < cum) break;
            }
            if (pick < 0) throw std::runtime_error("make_step_draw: degenerate class row");
            config[j] = pick;
        }
        for (size_t j = 0; j < batch.size(); ++j)
            draw.P.row(s).array() *= cube.block(batch[j]).col(config[j]).transpose().array();
    }
    draw.p_hat = draw.P.rowwise().mean();
    for (Eigen::Index s = 0; s < draw.p_hat.size(); ++s)
        if (draw.p_hat(s) <= 0.0)
            throw std::runtime_error("make_step_draw: drawn configuration has zero probability");
    return draw;
}

double joint_entropy_sampled(const StepDraw& draw, const PredictiveCube& cube, int m) {
    check_point(cube, m);
    const Eigen::Index s_count = draw.P.rows();
    const Eigen::ArrayXXd q = (draw.P * cube.block(m)).array() / cube.n_draws;
    const Eigen::ArrayXXd contrib = plogp(q).colwise() / draw.p_hat.array();
    return -contrib.sum() / static_cast<double>(s_count);
}

double joint_entropy_sampled(const JointState& state, const PredictiveCube& cube, int m,
                             int n_sim, uint64_t seed) {
    const StepDraw draw = make_step_draw(cube, state.selected, n_sim, seed);
    return joint_entropy_sampled(draw, cube, m);
}

std::vector<double> score_candidates(const JointState& state, const PredictiveCube& cube,
                                     const std::vector<int>& candidates, const ScoreOptions& opts,
                                     uint64_t step_seed) {
    for (int m : candidates) {
        check_point(cube, m);
        if (std::find(state.selected.begin(), state.selected.end(), m) != state.selected.end())
            throw std::invalid_argument("score_candidates: candidate already selected");
    }
    const int k = cube.n_classes;
    const int i = static_cast<int>(state.selected.size());
    const bool exact_path =
        state.mode == JointMode::exact && exact_within_cap(k, i + 1, opts.exact_config_cap);

    const MatrixXdR* table = nullptr;
    StepDraw draw;
    if (exact_path) {
        table = &state.P;
    } else {
        draw = make_step_draw(cube, state.selected, opts.n_sim, step_seed);
        table = &draw.P;
    }
    const Eigen::Index rows = table->rows();
    const Eigen::Index chunk =
        std::max<Eigen::Index>(1, kChunkElementBudget / std::max<Eigen::Index>(1, rows * k));

    std::vector<double> scores(candidates.size());
    for (size_t first = 0; first < candidates.size(); first += static_cast<size_t>(chunk)) {
        const size_t count = std::min<size_t>(chunk, candidates.size() - first);
        const MatrixXdR b = stack_blocks(cube, candidates, first, count);
        const MatrixXdR q_all = (*table * b) / static_cast<double>(cube.n_draws);
        for (size_t ci = 0; ci < count; ++ci) {
            const Eigen::ArrayXXd q =
                q_all.middleCols(static_cast<Eigen::Index>(ci) * k, k).array();
            double h;
            if (exact_path) {
                h = -plogp(q).sum();
            } else {
                h = -(plogp(q).colwise() / draw.p_hat.array()).sum() /
                    static_cast<double>(rows);
            }
            const int m = candidates[first + ci];
            scores[first + ci] =
                h - (state.cond_entropy_acc + conditional_entropy_term(cube, m));
        }
    }
    return scores;
}

JointState accept_candidate(JointState state, const PredictiveCube& cube, int m,
                            const ScoreOptions& opts) {
    check_point(cube, m);
    const int i = static_cast<int>(state.selected.size());
    if (state.mode == JointMode::exact &&
        exact_within_cap(cube.n_classes, i + 1, opts.exact_config_cap)) {
        return extend_joint_exact(state, cube, m);
    }
    state.mode = JointMode::sampled;
    state.P.resize(0, 0);
    state.cond_entropy_acc += conditional_entropy_term(cube, m);
    state.selected.push_back(m);
    return state;
}

double batch_mutual_information(const PredictiveCube& cube, const std::vector<int>& batch,
                                const ScoreOptions& opts, uint64_t seed) {
    if (batch.empty()) return 0.0;
    double cond = 0.0;
    for (int m : batch) cond += conditional_entropy_term(cube, m);

    double joint;
    if (exact_within_cap(cube.n_classes, static_cast<int>(batch.size()), opts.exact_config_cap)) {
        JointState state = make_initial_state(cube);
        for (int m : batch) state = extend_joint_exact(state, cube, m);
        joint = joint_entropy_exact(state);
    } else {
        const std::vector<int> head(batch.begin(), batch.end() - 1);
        const StepDraw draw = make_step_draw(cube, head, opts.n_sim, seed);
        joint = joint_entropy_sampled(draw, cube, batch.back());
    }
    return joint - cond;
}

}  // namespace conbatch
