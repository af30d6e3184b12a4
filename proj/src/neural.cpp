#include "conbatch/neural.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>

#include "conbatch/rng.hpp"
#include "json.hpp"

namespace conbatch {

namespace {

std::vector<int> layer_sizes(const ModelConfig& config) {
    if (config.input_dim <= 0) throw std::invalid_argument("model input_dim must be positive");
    if (config.class_count < 2) throw std::invalid_argument("model class_count must be >= 2");
    if (config.hidden_layers < 0) throw std::invalid_argument("hidden_layers must be >= 0");
    if (config.hidden_layers > 0 && config.width <= 0)
        throw std::invalid_argument("hidden width must be positive");
    std::vector<int> sizes;
    sizes.push_back(config.input_dim);
    for (int l = 0; l < config.hidden_layers; ++l) sizes.push_back(config.width);
    sizes.push_back(config.class_count);
    return sizes;
}

void apply_relu(MatrixXdR& z) { z = z.cwiseMax(0.0); }

}  // namespace

Network init_network(const ModelConfig& config, uint64_t seed) {
    const std::vector<int> sizes = layer_sizes(config);
    UniformRng rng(seed);
    Network net;
    for (size_t l = 0; l + 1 < sizes.size(); ++l) {
        const int fan_in = sizes[l];
        const int fan_out = sizes[l + 1];
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        Eigen::MatrixXd w(fan_in, fan_out);
        for (int r = 0; r < fan_in; ++r)
            for (int c = 0; c < fan_out; ++c) w(r, c) = rng.uniform(-limit, limit);
        net.weights.push_back(std::move(w));
        net.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return net;
}

Eigen::VectorXd forward(const Network& net, const Eigen::VectorXd& x,
                        const std::vector<Eigen::VectorXd>* masks) {
    if (x.size() != net.input_dim()) throw std::invalid_argument("forward: input size mismatch");
    const int hidden = net.layer_count() - 1;
    if (masks != nullptr && static_cast<int>(masks->size()) != hidden)
        throw std::invalid_argument("forward: one mask per hidden layer expected");
    Eigen::VectorXd a = x;
    for (int l = 0; l < hidden; ++l) {
        Eigen::VectorXd z = net.weights[l].transpose() * a + net.biases[l];
        z = z.cwiseMax(0.0);
        if (masks != nullptr) {
            if ((*masks)[l].size() != z.size())
                throw std::invalid_argument("forward: mask size mismatch");
            z = z.cwiseProduct((*masks)[l]);
        }
        a = std::move(z);
    }
    return net.weights.back().transpose() * a + net.biases.back();
}

MatrixXdR forward_batch(const Network& net, const MatrixXdR& x,
                        const std::vector<Eigen::VectorXd>* masks) {
    if (x.cols() != net.input_dim())
        throw std::invalid_argument("forward_batch: input width mismatch");
    const int hidden = net.layer_count() - 1;
    if (masks != nullptr && static_cast<int>(masks->size()) != hidden)
        throw std::invalid_argument("forward_batch: one mask per hidden layer expected");
    MatrixXdR a = x;
    for (int l = 0; l < hidden; ++l) {
        MatrixXdR z = (a * net.weights[l]).rowwise() + net.biases[l].transpose();
        apply_relu(z);
        if (masks != nullptr) {
            if ((*masks)[l].size() != z.cols())
                throw std::invalid_argument("forward_batch: mask size mismatch");
            z.array().rowwise() *= (*masks)[l].transpose().array();
        }
        a = std::move(z);
    }
    return (a * net.weights.back()).rowwise() + net.biases.back().transpose();
}

double loss_and_gradients(const Network& net, const MatrixXdR& x, const std::vector<int>& labels,
                          double weight_decay, const std::vector<MatrixXdR>* dropout,
                          NetGradients& grads) {
    const int batch = static_cast<int>(x.rows());
    if (batch == 0) throw std::invalid_argument("loss_and_gradients: empty minibatch");
    if (static_cast<int>(labels.size()) != batch)
        throw std::invalid_argument("loss_and_gradients: label count mismatch");
    const int hidden = net.layer_count() - 1;
    if (dropout != nullptr && static_cast<int>(dropout->size()) != hidden)
        throw std::invalid_argument("loss_and_gradients: one dropout matrix per hidden layer");

    // Forward, keeping pre-activations and post-dropout activations.
    std::vector<MatrixXdR> pre(hidden);
    std::vector<MatrixXdR> act(hidden + 1);
    act[0] = x;
    for (int l = 0; l < hidden; ++l) {
        pre[l] = (act[l] * net.weights[l]).rowwise() + net.biases[l].transpose();
        MatrixXdR h = pre[l].cwiseMax(0.0);
        if (dropout != nullptr) {
            if ((*dropout)[l].rows() != batch || (*dropout)[l].cols() != h.cols())
                throw std::invalid_argument("loss_and_gradients: dropout shape mismatch");
            h.array() *= (*dropout)[l].array();
        }
        act[l + 1] = std::move(h);
    }
    MatrixXdR logits = (act[hidden] * net.weights.back()).rowwise() + net.biases.back().transpose();

    const int classes = static_cast<int>(logits.cols());
    double loss = 0.0;
    MatrixXdR dlogits(batch, classes);
    for (int i = 0; i < batch; ++i) {
        const int y = labels[i];
        if (y < 0 || y >= classes) throw std::invalid_argument("loss_and_gradients: label out of range");
        const double zmax = logits.row(i).maxCoeff();
        const double sum_exp = (logits.row(i).array() - zmax).exp().sum();
        const double lse = zmax + std::log(sum_exp);
        loss += lse - logits(i, y);
        dlogits.row(i) = (logits.row(i).array() - lse).exp();
        dlogits(i, y) -= 1.0;
    }
    loss /= batch;
    dlogits /= static_cast<double>(batch);

    grads.weights.assign(net.weights.size(), {});
    grads.biases.assign(net.biases.size(), {});

    if (weight_decay != 0.0) {
        double reg = 0.0;
        for (const auto& w : net.weights) reg += w.squaredNorm();
        loss += weight_decay * 0.5 * reg;
    }

    MatrixXdR delta = std::move(dlogits);
    for (int l = hidden; l >= 0; --l) {
        grads.weights[l] = act[l].transpose() * delta;
        if (weight_decay != 0.0) grads.weights[l] += weight_decay * net.weights[l];
        grads.biases[l] = delta.colwise().sum().transpose();
        if (l == 0) break;
        MatrixXdR da = delta * net.weights[l].transpose();
        if (dropout != nullptr) da.array() *= (*dropout)[l - 1].array();
        delta = da.array() * (pre[l - 1].array() > 0.0).cast<double>();
    }
    return loss;
}

AdamState make_adam_state(const Network& net) {
    AdamState state;
    for (const auto& w : net.weights) {
        state.m_w.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
        state.v_w.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    }
    for (const auto& b : net.biases) {
        state.m_b.push_back(Eigen::VectorXd::Zero(b.size()));
        state.v_b.push_back(Eigen::VectorXd::Zero(b.size()));
    }
    return state;
}

void adam_step(Network& net, const NetGradients& grads, AdamState& state, double lr) {
    if (grads.weights.size() != net.weights.size() || grads.biases.size() != net.biases.size())
        throw std::invalid_argument("adam_step: gradient/parameter shape mismatch");
    state.step += 1;
    for (size_t l = 0; l < net.weights.size(); ++l) {
        adam_update(net.weights[l], grads.weights[l], state.m_w[l], state.v_w[l], state.step, lr,
                    state.beta1, state.beta2, state.eps);
        adam_update(net.biases[l], grads.biases[l], state.m_b[l], state.v_b[l], state.step, lr,
                    state.beta1, state.beta2, state.eps);
    }
}

Network train(Network net, const Dataset& dataset, const std::vector<int>& train_idx,
              const ModelConfig& config, uint64_t seed) {
    if (train_idx.empty()) throw std::invalid_argument("train: empty train set");
    if (config.minibatch <= 0) throw std::invalid_argument("train: minibatch must be positive");
    if (config.dropout_rate < 0.0 || config.dropout_rate >= 1.0)
        throw std::invalid_argument("train: dropout_rate must lie in [0, 1)");
    if (config.epochs < 0) throw std::invalid_argument("train: epochs must be >= 0");

    const int n = static_cast<int>(train_idx.size());
    const int dim = static_cast<int>(dataset.dim());
    MatrixXdR x(n, dim);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) {
        const int row = train_idx[i];
        if (row < 0 || row >= static_cast<int>(dataset.n_samples()))
            throw std::invalid_argument("train: train index out of range");
        x.row(i) = dataset.embeddings.row(row).cast<double>();
        y[i] = dataset.labels[row];
    }

    const int hidden = net.layer_count() - 1;
    const double p = config.dropout_rate;
    const double keep_scale = p > 0.0 ? 1.0 / (1.0 - p) : 1.0;

    UniformRng rng(seed);
    AdamState adam = make_adam_state(net);
    NetGradients grads;
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<MatrixXdR> masks(hidden);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        for (int start = 0; start < n; start += config.minibatch) {
            const int b = std::min(config.minibatch, n - start);
            MatrixXdR xb(b, dim);
            std::vector<int> yb(b);
            for (int i = 0; i < b; ++i) {
                xb.row(i) = x.row(order[start + i]);
                yb[i] = y[order[start + i]];
            }
            const std::vector<MatrixXdR>* mask_ptr = nullptr;
            if (p > 0.0) {
                for (int l = 0; l < hidden; ++l) {
                    const int units = static_cast<int>(net.weights[l].cols());
                    masks[l].resize(b, units);
                    for (int r = 0; r < b; ++r)
                        for (int c = 0; c < units; ++c)
                            masks[l](r, c) = rng.uniform() < p ? 0.0 : keep_scale;
                }
                mask_ptr = &masks;
            }
            const double loss =
                loss_and_gradients(net, xb, yb, config.weight_decay, mask_ptr, grads);
            if (!std::isfinite(loss)) {
                throw std::runtime_error("train: loss became non-finite at epoch " +
                                         std::to_string(epoch) + ", offset " +
                                         std::to_string(start));
            }
            adam_step(net, grads, adam, config.lr);
        }
    }
    return net;
}

void save_checkpoint(const Network& net, const std::filesystem::path& path) {
    nlohmann::json header;
    header["layers"] = nlohmann::json::array();
    for (const auto& w : net.weights)
        header["layers"].push_back({static_cast<int>(w.rows()), static_cast<int>(w.cols())});
    header["dtype"] = "f32-le";

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());
    out << header.dump() << '\n';
    std::vector<float> buf;
    for (size_t l = 0; l < net.weights.size(); ++l) {
        const auto& w = net.weights[l];
        buf.resize(static_cast<size_t>(w.size()) + static_cast<size_t>(net.biases[l].size()));
        size_t k = 0;
        for (int r = 0; r < w.rows(); ++r)
            for (int c = 0; c < w.cols(); ++c) buf[k++] = static_cast<float>(w(r, c));
        for (int i = 0; i < net.biases[l].size(); ++i)
            buf[k++] = static_cast<float>(net.biases[l](i));
        out.write(reinterpret_cast<const char*>(buf.data()),
                  static_cast<std::streamsize>(buf.size() * sizeof(float)));
    }
    if (!out) throw std::runtime_error("short write for checkpoint: " + path.string());
}

Network load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read checkpoint: " + path.string());
    std::string header_line;
    if (!std::getline(in, header_line))
        throw std::runtime_error("checkpoint missing header: " + path.string());
    const nlohmann::json header = nlohmann::json::parse(header_line);

    Network net;
    for (const auto& shape : header.at("layers")) {
        const int rows = shape.at(0).get<int>();
        const int cols = shape.at(1).get<int>();
        if (rows <= 0 || cols <= 0) throw std::runtime_error("checkpoint layer shape invalid");
        std::vector<float> buf(static_cast<size_t>(rows) * cols + cols);
        in.read(reinterpret_cast<char*>(buf.data()),
                static_cast<std::streamsize>(buf.size() * sizeof(float)));
        if (!in) throw std::runtime_error("checkpoint blob truncated: " + path.string());
        Eigen::MatrixXd w(rows, cols);
        size_t k = 0;
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) w(r, c) = buf[k++];
        Eigen::VectorXd b(cols);
        for (int c = 0; c < cols; ++c) b(c) = buf[k++];
        net.weights.push_back(std::move(w));
        net.biases.push_back(std::move(b));
    }
    if (net.weights.empty()) throw std::runtime_error("checkpoint has no layers");
    return net;
}

}  // namespace conbatch
