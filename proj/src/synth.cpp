#include "conbatch/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "conbatch/rng.hpp"

namespace conbatch {

using nlohmann::json;

namespace {

void validate_spec(const SynthSpec& s) {
    if (s.class_count < 2) throw std::invalid_argument("class_count must be >= 2");
    if (s.n_samples < s.class_count)
        throw std::invalid_argument("n_samples must be >= class_count");
    if (s.dim < 1) throw std::invalid_argument("dim must be >= 1");
    if (s.cluster_spread < 0.0) throw std::invalid_argument("cluster_spread must be >= 0");
    if (s.geo_bbox[0] >= s.geo_bbox[1] || s.geo_bbox[2] >= s.geo_bbox[3])
        throw std::invalid_argument("geo_bbox must satisfy lat_min < lat_max, lon_min < lon_max");
    if (s.area_grid[0] < 1 || s.area_grid[1] < 1)
        throw std::invalid_argument("area_grid must be at least 1x1");
    const double sum = s.split_fractions[0] + s.split_fractions[1] + s.split_fractions[2];
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("split_fractions must sum to 1");
    for (const double f : s.split_fractions)
        if (f < 0.0) throw std::invalid_argument("split_fractions must be non-negative");
    if (s.geo_hotspots < 0 || s.geo_hotspot_fraction < 0.0 || s.geo_hotspot_fraction > 1.0)
        throw std::invalid_argument("invalid hotspot settings");
}

}  // namespace

SynthSpec synth_spec_from_json(const std::string& text) {
    SynthSpec s;
    try {
        const json j = json::parse(text);
        s.n_samples = j.value("n_samples", s.n_samples);
        s.dim = j.value("dim", s.dim);
        s.class_count = j.value("class_count", s.class_count);
        s.cluster_spread = j.value("cluster_spread", s.cluster_spread);
        s.geo_bbox = j.value("geo_bbox", s.geo_bbox);
        s.area_grid = j.value("area_grid", s.area_grid);
        s.split_fractions = j.value("split_fractions", s.split_fractions);
        s.geo_hotspots = j.value("geo_hotspots", s.geo_hotspots);
        s.geo_hotspot_fraction = j.value("geo_hotspot_fraction", s.geo_hotspot_fraction);
    } catch (const json::exception& e) {
        throw std::invalid_argument("synthetic spec: " + std::string(e.what()));
    }
    return s;
}

std::string synth_spec_to_json(const SynthSpec& s) {
    json j;
    j["n_samples"] = s.n_samples;
    j["dim"] = s.dim;
    j["class_count"] = s.class_count;
    j["cluster_spread"] = s.cluster_spread;
    j["geo_bbox"] = s.geo_bbox;
    j["area_grid"] = s.area_grid;
    j["split_fractions"] = s.split_fractions;
    j["geo_hotspots"] = s.geo_hotspots;
    j["geo_hotspot_fraction"] = s.geo_hotspot_fraction;
    return j.dump();
}

int grid_area_id(const SynthSpec& spec, const GeoPoint& p) {
    const auto cell = [](double v, double lo, double hi, int n) {
        int c = static_cast<int>((v - lo) / (hi - lo) * n);
        return std::clamp(c, 0, n - 1);
    };
    const int row = cell(p.lat, spec.geo_bbox[0], spec.geo_bbox[1], spec.area_grid[0]);
    const int col = cell(p.lon, spec.geo_bbox[2], spec.geo_bbox[3], spec.area_grid[1]);
    return row * spec.area_grid[1] + col;
}

std::pair<Dataset, SplitState> gen_synthetic(const SynthSpec& spec, uint64_t seed) {
    validate_spec(spec);
    UniformRng rng(seed);
    const int n = spec.n_samples;
    const int k = spec.class_count;

    // Cluster centers first, then hotspots, then per-sample draws: the stream
    // layout is part of the determinism contract.
    MatrixXdR centers(k, spec.dim);
    for (int c = 0; c < k; ++c)
        for (int d = 0; d < spec.dim; ++d) centers(c, d) = rng.normal();

    std::vector<GeoPoint> hotspots(spec.geo_hotspots);
    for (auto& h : hotspots) {
        h.lat = rng.uniform(spec.geo_bbox[0], spec.geo_bbox[1]);
        h.lon = rng.uniform(spec.geo_bbox[2], spec.geo_bbox[3]);
    }
    const double lat_span = spec.geo_bbox[1] - spec.geo_bbox[0];
    const double lon_span = spec.geo_bbox[3] - spec.geo_bbox[2];

    Dataset ds;
    ds.class_count = k;
    for (int c = 0; c < k; ++c) ds.class_names.push_back("class_" + std::to_string(c));
    ds.embeddings.resize(n, spec.dim);
    ds.labels.resize(n);
    ds.geoloc.resize(n);
    ds.area_ids.resize(n);
    ds.external_ids.resize(n);

    for (int i = 0; i < n; ++i) {
        const int label = i % k;
        ds.labels[i] = label;
        ds.external_ids[i] = i;
        for (int d = 0; d < spec.dim; ++d)
            ds.embeddings(i, d) =
                static_cast<float>(centers(label, d) + spec.cluster_spread * rng.normal());

        GeoPoint g;
        if (!hotspots.empty() && rng.uniform() < spec.geo_hotspot_fraction) {
            const auto& h = hotspots[rng.uniform_index(hotspots.size())];
            g.lat = std::clamp(h.lat + 0.03 * lat_span * rng.normal(), spec.geo_bbox[0],
                               spec.geo_bbox[1]);
            g.lon = std::clamp(h.lon + 0.03 * lon_span * rng.normal(), spec.geo_bbox[2],
                               spec.geo_bbox[3]);
        } else {
            g.lat = rng.uniform(spec.geo_bbox[0], spec.geo_bbox[1]);
            g.lon = rng.uniform(spec.geo_bbox[2], spec.geo_bbox[3]);
        }
        ds.geoloc[i] = g;
        ds.area_ids[i] = grid_area_id(spec, g);
    }

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    const int n_train = static_cast<int>(std::llround(spec.split_fractions[0] * n));
    const int n_test = static_cast<int>(std::llround(spec.split_fractions[1] * n));
    if (n_train + n_test > n) throw std::invalid_argument("split_fractions leave no pool");

    SplitState splits;
    splits.train_idx.assign(perm.begin(), perm.begin() + n_train);
    splits.test_idx.assign(perm.begin() + n_train, perm.begin() + n_train + n_test);
    splits.pool_idx.assign(perm.begin() + n_train + n_test, perm.end());
    std::sort(splits.train_idx.begin(), splits.train_idx.end());
    std::sort(splits.test_idx.begin(), splits.test_idx.end());
    std::sort(splits.pool_idx.begin(), splits.pool_idx.end());

    return {std::move(ds), std::move(splits)};
}

}  // namespace conbatch
