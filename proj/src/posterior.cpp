#include "conbatch/posterior.hpp"

#include <cmath>
#include <stdexcept>

namespace conbatch {

namespace {

MatrixXdR gather_rows(const Dataset& dataset, const std::vector<int>& rows) {
    MatrixXdR x(rows.size(), dataset.dim());
    for (size_t i = 0; i < rows.size(); ++i) {
        const int r = rows[i];
        if (r < 0 || r >= static_cast<int>(dataset.n_samples()))
            throw std::invalid_argument("row index out of range");
        x.row(static_cast<Eigen::Index>(i)) = dataset.embeddings.row(r).cast<double>();
    }
    return x;
}

void softmax_rows_into(const MatrixXdR& logits, MatrixXdR& out, Eigen::Index out_row0,
                       Eigen::Index stride) {
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double zmax = logits.row(i).maxCoeff();
        Eigen::ArrayXd e = (logits.row(i).array() - zmax).exp();
        out.row(out_row0 + i * stride) = (e / e.sum()).matrix();
    }
}

}  // namespace

std::vector<Eigen::VectorXd> draw_mask_set(const Network& net, double dropout_rate,
                                           UniformRng& rng) {
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw std::invalid_argument("dropout_rate must lie in [0, 1)");
    const int hidden = net.layer_count() - 1;
    const double keep_scale = dropout_rate > 0.0 ? 1.0 / (1.0 - dropout_rate) : 1.0;
    std::vector<Eigen::VectorXd> masks(hidden);
    for (int l = 0; l < hidden; ++l) {
        const int units = static_cast<int>(net.weights[l].cols());
        masks[l].resize(units);
        for (int u = 0; u < units; ++u)
            masks[l](u) = rng.uniform() < dropout_rate ? 0.0 : keep_scale;
    }
    return masks;
}

PredictiveCube sample_posterior(const Network& net, const Dataset& dataset,
                                const std::vector<int>& rows, int n_draws, double dropout_rate,
                                uint64_t seed) {
    if (n_draws <= 0) throw std::invalid_argument("n_draws must be positive");
    const int m = static_cast<int>(rows.size());
    const int k = net.output_dim();

    PredictiveCube cube;
    cube.n_points = m;
    cube.n_draws = n_draws;
    cube.n_classes = k;
    cube.sample_index_map = rows;
    cube.probs.resize(static_cast<Eigen::Index>(m) * n_draws, k);
    if (m == 0) return cube;

    const MatrixXdR x = gather_rows(dataset, rows);
    UniformRng rng(seed);
    for (int t = 0; t < n_draws; ++t) {
        const std::vector<Eigen::VectorXd> masks = draw_mask_set(net, dropout_rate, rng);
        const MatrixXdR logits = forward_batch(net, x, &masks);
        softmax_rows_into(logits, cube.probs, t, n_draws);
    }
    return cube;
}

MatrixXdR predictive_mean(const PredictiveCube& cube) {
    MatrixXdR mean(cube.n_points, cube.n_classes);
    for (int m = 0; m < cube.n_points; ++m)
        mean.row(m) = cube.block(m).colwise().mean();
    return mean;
}

double evaluate_accuracy(const PredictiveCube& cube, const std::vector<int>& labels) {
    if (cube.n_points == 0) throw std::invalid_argument("evaluate_accuracy: empty evaluation set");
    if (static_cast<int>(labels.size()) != cube.n_points)
        throw std::invalid_argument("evaluate_accuracy: one label per cube point expected");
    const MatrixXdR mean = predictive_mean(cube);
    int correct = 0;
    for (int m = 0; m < cube.n_points; ++m) {
        int best = 0;
        for (int c = 1; c < cube.n_classes; ++c)
            if (mean(m, c) > mean(m, best)) best = c;
        if (best == labels[m]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(cube.n_points);
}

}  // namespace conbatch
