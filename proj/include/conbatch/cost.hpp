#pragma once

#include <filesystem>
#include <map>

#include "conbatch/data.hpp"
#include "conbatch/geo.hpp"

namespace conbatch {

enum class CostVariant { none, distance, distance_return, area_cost };

struct CostModel {
    CostVariant variant = CostVariant::none;
    DistanceMetric metric = DistanceMetric::haversine;
    std::map<int, double> area_costs;  // area_id -> cost units in [1, 100]
};

// Visited-so-far anchor points; both unset before the first acquisition.
struct TourContext {
    int first = -1;
    int prev = -1;

    bool empty() const { return prev < 0; }
    void visit(int idx) {
        if (first < 0) first = idx;
        prev = idx;
    }
};

// Sequential marginal cost of acquiring `candidate` next.
//   none:            0
//   distance:        0 for the first point, else d(prev, candidate)
//   distance_return: 0 for the first point, else the tour-with-return
//                    increment d(prev,c) + d(c,first) - d(prev,first)
//   area_cost:       area_costs[area_id] regardless of tour position
double marginal_cost(const CostModel& model, const TourContext& ctx, int candidate,
                     const Dataset& dataset);

// Affine map from per-area sample counts onto [1, 100] cost units.
std::map<int, double> build_area_costs(const Dataset& dataset);

// Optional override file: header "area_id,cost", costs in [1, 100].
std::map<int, double> load_area_costs(const std::filesystem::path& path);

// Independent tour reconstruction used to audit charged costs.
double tour_length(const std::vector<GeoPoint>& stops, DistanceMetric metric, bool with_return);

CostVariant cost_variant_from_string(const std::string& name);
std::string to_string(CostVariant variant);

}  // namespace conbatch
