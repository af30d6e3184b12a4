#pragma once

// Independent reference implementations used to check the engine. These are
// written from the defining formulas on plain containers, on purpose sharing
// no code with the library.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

// probs[m][t][c]
using Cube = std::vector<std::vector<std::vector<double>>>;

inline double entropy(const std::vector<double>& p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log(v);
    return h;
}

// Brute-force joint entropy of `batch` via full configuration enumeration.
inline double joint_entropy(const Cube& probs, const std::vector<int>& batch) {
    if (batch.empty()) return 0.0;
    const size_t t_draws = probs.front().size();
    const size_t k = probs.front().front().size();
    std::vector<size_t> conf(batch.size(), 0);
    double h = 0.0;
    for (;;) {
        double q = 0.0;
        for (size_t t = 0; t < t_draws; ++t) {
            double prod = 1.0;
            for (size_t j = 0; j < batch.size(); ++j) prod *= probs[batch[j]][t][conf[j]];
            q += prod;
        }
        q /= static_cast<double>(t_draws);
        if (q > 0.0) h -= q * std::log(q);
        size_t j = 0;
        while (j < conf.size() && ++conf[j] == k) conf[j++] = 0;
        if (j == conf.size()) break;
    }
    return h;
}

inline double conditional_entropy(const Cube& probs, int m) {
    double acc = 0.0;
    for (const auto& slice : probs[m]) acc += entropy(slice);
    return acc / static_cast<double>(probs[m].size());
}

inline double batch_mi(const Cube& probs, const std::vector<int>& batch) {
    double cond = 0.0;
    for (int m : batch) cond += conditional_entropy(probs, m);
    return joint_entropy(probs, batch) - cond;
}

// Random cube with strictly positive simplex rows.
inline Cube random_cube(int m, int t, int k, uint32_t seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    Cube probs(m, std::vector<std::vector<double>>(t, std::vector<double>(k)));
    for (auto& point : probs)
        for (auto& slice : point) {
            double sum = 0.0;
            for (auto& v : slice) {
                v = u(gen);
                sum += v;
            }
            for (auto& v : slice) v /= sum;
        }
    return probs;
}

// Haversine restated through the atan2 form, distinct from the asin form.
inline double haversine_atan2(double lat1, double lon1, double lat2, double lon2) {
    const double rad = std::acos(-1.0) / 180.0;
    const double dphi = (lat2 - lat1) * rad;
    const double dlam = (lon2 - lon1) * rad;
    const double a = std::sin(dphi / 2) * std::sin(dphi / 2) +
                     std::cos(lat1 * rad) * std::cos(lat2 * rad) * std::sin(dlam / 2) *
                         std::sin(dlam / 2);
    return 6371000.0 * 2.0 * std::atan2(std::sqrt(a), std::sqrt(1.0 - a));
}

}  // namespace oracle
