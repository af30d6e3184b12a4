#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>

#include "conbatch/data.hpp"

namespace conbatch {

// Desk-scale surrogate for the released building datasets: class-balanced
// Gaussian clusters in embedding space, each sample dropped at a geolocation
// inside a bounding box that is cut into a rectangular area grid.
struct SynthSpec {
    int n_samples = 1000;
    int dim = 16;
    int class_count = 10;
    double cluster_spread = 0.5;
    // lat_min, lat_max, lon_min, lon_max (degrees).
    std::array<double, 4> geo_bbox = {51.85, 52.00, 4.40, 4.60};
    std::array<int, 2> area_grid = {4, 4};
    // train, test, pool fractions; must sum to 1.
    std::array<double, 3> split_fractions = {0.02, 0.30, 0.68};
    // Optional clumped geolocation sampling: this fraction of samples lands in
    // Gaussian clumps around `geo_hotspots` random centers, giving areas very
    // different building counts (and therefore very different area costs).
    int geo_hotspots = 0;
    double geo_hotspot_fraction = 0.0;
};

SynthSpec synth_spec_from_json(const std::string& text);
std::string synth_spec_to_json(const SynthSpec& spec);

// Index of the grid cell containing a point; cells are half-open except the
// top row/column, which absorb the bbox edge.
int grid_area_id(const SynthSpec& spec, const GeoPoint& p);

// Deterministic per (spec, seed): identical output across runs.
std::pair<Dataset, SplitState> gen_synthetic(const SynthSpec& spec, uint64_t seed);

}  // namespace conbatch
