#include <cmath>
#include <numeric>
#include <vector>

#include "conbatch/posterior.hpp"
#include "doctest.h"

using namespace conbatch;

namespace {

Dataset random_dataset(int n, int dim, int k, uint64_t seed) {
    Dataset ds;
    ds.class_count = k;
    for (int c = 0; c < k; ++c) ds.class_names.push_back("c" + std::to_string(c));
    ds.embeddings.resize(n, dim);
    ds.labels.resize(n);
    ds.geoloc.assign(n, GeoPoint{52.0, 4.5});
    ds.area_ids.assign(n, -1);
    ds.external_ids.resize(n);
    UniformRng rng(seed);
    for (int i = 0; i < n; ++i) {
        ds.labels[i] = i % k;
        ds.external_ids[i] = i;
        for (int d = 0; d < dim; ++d) ds.embeddings(i, d) = static_cast<float>(rng.normal());
    }
    return ds;
}

Eigen::VectorXd stable_softmax(const Eigen::VectorXd& z) {
    const Eigen::ArrayXd shifted = z.array() - z.maxCoeff();
    const Eigen::ArrayXd e = shifted.exp();
    return (e / e.sum()).matrix();
}

PredictiveCube cube_from(const std::vector<std::vector<std::vector<double>>>& data) {
    PredictiveCube cube;
    cube.n_points = static_cast<int>(data.size());
    cube.n_draws = static_cast<int>(data[0].size());
    cube.n_classes = static_cast<int>(data[0][0].size());
    cube.probs.resize(static_cast<Eigen::Index>(cube.n_points) * cube.n_draws, cube.n_classes);
    cube.sample_index_map.resize(data.size());
    std::iota(cube.sample_index_map.begin(), cube.sample_index_map.end(), 0);
    for (int m = 0; m < cube.n_points; ++m)
        for (int t = 0; t < cube.n_draws; ++t)
            for (int k = 0; k < cube.n_classes; ++k)
                cube.probs(static_cast<Eigen::Index>(m) * cube.n_draws + t, k) = data[m][t][k];
    return cube;
}

}  // namespace

TEST_CASE("zero dropout collapses all draws to the deterministic softmax") {
    const Dataset ds = random_dataset(6, 4, 3, 1);
    ModelConfig cfg;
    cfg.input_dim = 4;
    cfg.hidden_layers = 2;
    cfg.width = 8;
    cfg.class_count = 3;
    const Network net = init_network(cfg, 4);

    const std::vector<int> rows = {0, 2, 5};
    const PredictiveCube cube = sample_posterior(net, ds, rows, 7, 0.0, 99);
    REQUIRE(cube.n_points == 3);
    REQUIRE(cube.n_draws == 7);
    REQUIRE(cube.n_classes == 3);
    CHECK(cube.sample_index_map == rows);

    for (int m = 0; m < 3; ++m) {
        const Eigen::VectorXd x = ds.embeddings.row(rows[m]).cast<double>().transpose();
        const Eigen::VectorXd expect = stable_softmax(forward(net, x));
        for (int t = 0; t < 7; ++t)
            CHECK((cube.row(m, t).transpose() - expect).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("every cube row is a distribution") {
    const Dataset ds = random_dataset(10, 5, 4, 2);
    ModelConfig cfg;
    cfg.input_dim = 5;
    cfg.hidden_layers = 2;
    cfg.width = 12;
    cfg.class_count = 4;
    const Network net = init_network(cfg, 8);

    std::vector<int> rows(10);
    std::iota(rows.begin(), rows.end(), 0);
    const PredictiveCube cube = sample_posterior(net, ds, rows, 15, 0.25, 3);
    for (int r = 0; r < cube.probs.rows(); ++r) {
        CHECK(cube.probs.row(r).sum() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(cube.probs.row(r).minCoeff() >= 0.0);
    }
}

TEST_CASE("draws share one mask set across points and follow the published stream") {
    const Dataset ds = random_dataset(5, 4, 2, 3);
    ModelConfig cfg;
    cfg.input_dim = 4;
    cfg.hidden_layers = 2;
    cfg.width = 6;
    cfg.class_count = 2;
    const Network net = init_network(cfg, 12);

    const std::vector<int> rows = {4, 1, 3};
    const uint64_t seed = 31;
    const PredictiveCube cube = sample_posterior(net, ds, rows, 9, 0.3, seed);

    // replay: one mask set per draw, consumed in draw order, applied to all points
    UniformRng rng(seed);
    for (int t = 0; t < 9; ++t) {
        const std::vector<Eigen::VectorXd> masks = draw_mask_set(net, 0.3, rng);
        REQUIRE(masks.size() == 2);
        for (const auto& m : masks)
            for (int u = 0; u < m.size(); ++u)
                CHECK((m(u) == 0.0 || m(u) == doctest::Approx(1.0 / 0.7).epsilon(1e-12)));
        for (size_t p = 0; p < rows.size(); ++p) {
            const Eigen::VectorXd x = ds.embeddings.row(rows[p]).cast<double>().transpose();
            const Eigen::VectorXd expect = stable_softmax(forward(net, x, &masks));
            CHECK((cube.row(static_cast<int>(p), t).transpose() - expect).cwiseAbs().maxCoeff() <
                  1e-12);
        }
    }

    const PredictiveCube again = sample_posterior(net, ds, rows, 9, 0.3, seed);
    CHECK(cube.probs == again.probs);
    const PredictiveCube other = sample_posterior(net, ds, rows, 9, 0.3, seed + 1);
    CHECK(cube.probs != other.probs);
}

TEST_CASE("predictive_mean averages over draws") {
    const PredictiveCube cube = cube_from({
        {{1.0, 0.0}, {0.0, 1.0}},
        {{0.25, 0.75}, {0.75, 0.25}},
    });
    const MatrixXdR mean = predictive_mean(cube);
    REQUIRE(mean.rows() == 2);
    REQUIRE(mean.cols() == 2);
    CHECK(mean(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(mean(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(mean(1, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(mean(1, 1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("accuracy uses the predictive-mean argmax with ties to the lower class") {
    const PredictiveCube cube = cube_from({
        {{0.9, 0.1}, {0.8, 0.2}},   // argmax 0
        {{0.1, 0.9}, {0.4, 0.6}},   // argmax 1
        {{0.6, 0.4}, {0.2, 0.8}},   // mean (0.4, 0.6) -> argmax 1
    });
    CHECK(evaluate_accuracy(cube, {0, 1, 1}) == doctest::Approx(1.0));
    CHECK(evaluate_accuracy(cube, {0, 1, 0}) == doctest::Approx(2.0 / 3.0));
    CHECK(evaluate_accuracy(cube, {1, 0, 0}) == doctest::Approx(0.0));

    // a perfectly uniform posterior predicts class 0 everywhere
    const PredictiveCube uniform = cube_from({
        {{0.5, 0.5}},
        {{0.5, 0.5}},
        {{0.5, 0.5}},
        {{0.5, 0.5}},
    });
    CHECK(evaluate_accuracy(uniform, {0, 1, 0, 1}) == doctest::Approx(0.5));
}

TEST_CASE("posterior sampling rejects bad arguments") {
    const Dataset ds = random_dataset(4, 3, 2, 4);
    ModelConfig cfg;
    cfg.input_dim = 3;
    cfg.hidden_layers = 1;
    cfg.width = 4;
    cfg.class_count = 2;
    const Network net = init_network(cfg, 6);
    CHECK_THROWS_AS(sample_posterior(net, ds, {0}, 0, 0.1, 1), std::invalid_argument);
    CHECK_THROWS_AS(sample_posterior(net, ds, {9}, 3, 0.1, 1), std::invalid_argument);
    CHECK_THROWS_AS(sample_posterior(net, ds, {0}, 3, 1.0, 1), std::invalid_argument);

    const PredictiveCube cube = sample_posterior(net, ds, {0, 1}, 3, 0.1, 1);
    CHECK_THROWS_AS(evaluate_accuracy(cube, {0}), std::invalid_argument);
}
