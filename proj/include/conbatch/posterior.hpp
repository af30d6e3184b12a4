#pragma once

#include <cstdint>
#include <vector>

#include "conbatch/data.hpp"
#include "conbatch/neural.hpp"
#include "conbatch/rng.hpp"
#include "conbatch/types.hpp"

namespace conbatch {

// Predictive probabilities for M points under T posterior draws, stored as an
// (M*T) x K row-major matrix; the T x K block for point m starts at row m*T.
// sample_index_map records which dataset row each point describes.
struct PredictiveCube {
    MatrixXdR probs;
    int n_points = 0;
    int n_draws = 0;
    int n_classes = 0;
    std::vector<int> sample_index_map;

    auto block(int m) const { return probs.middleRows(static_cast<Eigen::Index>(m) * n_draws, n_draws); }
    auto row(int m, int t) const { return probs.row(static_cast<Eigen::Index>(m) * n_draws + t); }
};

// One inverted-dropout factor vector per hidden layer, entries {0, 1/(1-p)}.
std::vector<Eigen::VectorXd> draw_mask_set(const Network& net, double dropout_rate,
                                           UniformRng& rng);

// T posterior draws, each a mask-set shared across every requested point so
// that joint scores see a common weight realisation per draw.
PredictiveCube sample_posterior(const Network& net, const Dataset& dataset,
                                const std::vector<int>& rows, int n_draws, double dropout_rate,
                                uint64_t seed);

// Mean over draws; M x K.
MatrixXdR predictive_mean(const PredictiveCube& cube);

// Fraction of points whose predictive-mean argmax equals the label; argmax
// ties go to the lower class index. labels[m] belongs to cube point m.
double evaluate_accuracy(const PredictiveCube& cube, const std::vector<int>& labels);

}  // namespace conbatch
