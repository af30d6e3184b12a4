#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "conbatch/data.hpp"
#include "conbatch/types.hpp"

namespace conbatch {

struct ModelConfig {
    int input_dim = 0;
    int hidden_layers = 2;
    int width = 256;
    double dropout_rate = 0.1;
    double lr = 1e-4;
    double weight_decay = 1e-4;
    int epochs = 200;
    int minibatch = 32;
    int class_count = 0;
};

// Dense classifier input_dim -> width x hidden_layers -> class_count with
// ReLU hidden activations and inverted dropout after each hidden activation.
struct Network {
    std::vector<Eigen::MatrixXd> weights;  // weights[l] is fan_in x fan_out
    std::vector<Eigen::VectorXd> biases;

    int layer_count() const { return static_cast<int>(weights.size()); }
    int input_dim() const { return static_cast<int>(weights.front().rows()); }
    int output_dim() const { return static_cast<int>(weights.back().cols()); }
};

// Glorot-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases.
Network init_network(const ModelConfig& config, uint64_t seed);

// Single-sample pass returning logits. `masks` holds one factor vector per
// hidden layer with entries in {0, 1/(1-p)}; nullptr means no dropout.
Eigen::VectorXd forward(const Network& net, const Eigen::VectorXd& x,
                        const std::vector<Eigen::VectorXd>* masks = nullptr);

// Batched pass over the rows of X with one shared per-unit mask vector per
// hidden layer (the mask multiplies whole activation columns).
MatrixXdR forward_batch(const Network& net, const MatrixXdR& x,
                        const std::vector<Eigen::VectorXd>* masks = nullptr);

struct NetGradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

// Mean cross-entropy over the minibatch plus weight_decay * 0.5 * ||W||^2 on
// weight matrices only, with analytic gradients. `dropout` holds one B x width
// factor matrix per hidden layer (per-sample masks), or nullptr.
double loss_and_gradients(const Network& net, const MatrixXdR& x, const std::vector<int>& labels,
                          double weight_decay, const std::vector<MatrixXdR>* dropout,
                          NetGradients& grads);

struct AdamState {
    std::vector<Eigen::MatrixXd> m_w, v_w;
    std::vector<Eigen::VectorXd> m_b, v_b;
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

AdamState make_adam_state(const Network& net);

// Bias-corrected update for one parameter tensor; t is the post-increment
// step counter.
template <typename T>
void adam_update(T& param, const T& grad, T& m, T& v, long t, double lr, double beta1,
                 double beta2, double eps) {
    m = beta1 * m + (1.0 - beta1) * grad;
    v = (beta2 * v.array() + (1.0 - beta2) * grad.array().square()).matrix();
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    param.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
}

// One optimizer step over every parameter tensor of the network.
void adam_step(Network& net, const NetGradients& grads, AdamState& state, double lr);

// Retrains from scratch semantics live in the caller: this runs
// config.epochs epochs of shuffled minibatches over train_idx rows and
// returns the updated network. Throws on a non-finite loss.
Network train(Network net, const Dataset& dataset, const std::vector<int>& train_idx,
              const ModelConfig& config, uint64_t seed);

// Debug checkpoint: one-line JSON shape header followed by the flat
// little-endian f32 parameter blob.
void save_checkpoint(const Network& net, const std::filesystem::path& path);
Network load_checkpoint(const std::filesystem::path& path);

}  // namespace conbatch
