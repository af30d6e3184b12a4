#pragma once

#include <numeric>
#include <vector>

#include "conbatch/data.hpp"
#include "conbatch/posterior.hpp"
#include "oracles.hpp"

namespace testutil {

inline conbatch::PredictiveCube to_cube(const oracle::Cube& probs) {
    conbatch::PredictiveCube cube;
    cube.n_points = static_cast<int>(probs.size());
    cube.n_draws = static_cast<int>(probs.front().size());
    cube.n_classes = static_cast<int>(probs.front().front().size());
    cube.probs.resize(static_cast<Eigen::Index>(cube.n_points) * cube.n_draws, cube.n_classes);
    for (int m = 0; m < cube.n_points; ++m)
        for (int t = 0; t < cube.n_draws; ++t)
            for (int c = 0; c < cube.n_classes; ++c)
                cube.probs(static_cast<Eigen::Index>(m) * cube.n_draws + t, c) = probs[m][t][c];
    cube.sample_index_map.resize(cube.n_points);
    std::iota(cube.sample_index_map.begin(), cube.sample_index_map.end(), 0);
    return cube;
}

// Minimal dataset with fixed geolocations; labels alternate between two
// classes, embeddings are small deterministic values.
inline conbatch::Dataset geo_dataset(const std::vector<conbatch::GeoPoint>& points,
                                     std::vector<int> area_ids = {}) {
    const int n = static_cast<int>(points.size());
    conbatch::Dataset ds;
    ds.embeddings.resize(n, 2);
    for (int i = 0; i < n; ++i) {
        ds.embeddings(i, 0) = static_cast<float>(i) * 0.25f;
        ds.embeddings(i, 1) = 1.0f - static_cast<float>(i % 3);
    }
    ds.geoloc = points;
    ds.class_count = 2;
    ds.class_names = {"a", "b"};
    for (int i = 0; i < n; ++i) {
        ds.labels.push_back(i % 2);
        ds.external_ids.push_back(i);
    }
    if (area_ids.empty()) area_ids.assign(n, -1);
    ds.area_ids = std::move(area_ids);
    return ds;
}

}  // namespace testutil
