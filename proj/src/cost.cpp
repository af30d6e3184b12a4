#include "conbatch/cost.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace conbatch {

namespace {

const GeoPoint& point_of(const Dataset& dataset, int idx) {
    if (idx < 0 || idx >= static_cast<int>(dataset.n_samples()))
        throw std::invalid_argument("cost: sample index out of range");
    return dataset.geoloc[idx];
}

}  // namespace

double marginal_cost(const CostModel& model, const TourContext& ctx, int candidate,
                     const Dataset& dataset) {
    switch (model.variant) {
        case CostVariant::none:
            return 0.0;
        case CostVariant::distance: {
            if (ctx.empty()) return 0.0;
            return geo_distance(point_of(dataset, ctx.prev), point_of(dataset, candidate),
                                model.metric);
        }
        case CostVariant::distance_return: {
            if (ctx.empty()) return 0.0;
            const GeoPoint& first = point_of(dataset, ctx.first);
            const GeoPoint& prev = point_of(dataset, ctx.prev);
            const GeoPoint& cand = point_of(dataset, candidate);
            const double inc = geo_distance(prev, cand, model.metric) +
                               geo_distance(cand, first, model.metric) -
                               geo_distance(prev, first, model.metric);
            if (inc < -1e-9)
                throw std::runtime_error(
                    "distance_return: negative tour increment; metric violates the triangle "
                    "inequality");
            return std::max(inc, 0.0);
        }
        case CostVariant::area_cost: {
            if (model.area_costs.empty())
                throw std::runtime_error("area_cost: no area cost map provided");
            if (candidate < 0 || candidate >= dataset.n_samples())
                throw std::invalid_argument("cost: sample index out of range");
            const int area = dataset.area_ids[candidate];
            if (area < 0) throw std::runtime_error("area_cost: candidate has no area_id");
            const auto it = model.area_costs.find(area);
            if (it == model.area_costs.end())
                throw std::runtime_error("area_cost: area " + std::to_string(area) +
                                         " missing from cost map");
            return it->second;
        }
    }
    throw std::logic_error("marginal_cost: unknown variant");
}

std::map<int, double> build_area_costs(const Dataset& dataset) {
    std::unordered_map<int, long> counts;
    for (int a : dataset.area_ids)
        if (a >= 0) ++counts[a];
    if (counts.empty()) throw std::runtime_error("build_area_costs: dataset defines no areas");

    long min_count = counts.begin()->second;
    long max_count = min_count;
    for (const auto& [area, count] : counts) {
        min_count = std::min(min_count, count);
        max_count = std::max(max_count, count);
    }

    std::map<int, double> costs;
    for (const auto& [area, count] : counts) {
        if (max_count == min_count) {
            costs[area] = 1.0;
            continue;
        }
        const double x = static_cast<double>(count - min_count) /
                         static_cast<double>(max_count - min_count);
        // round-half-down keeps the midpoint count on the lower cost tier
        costs[area] = 1.0 + std::ceil(99.0 * x - 0.5);
    }
    return costs;
}

std::map<int, double> load_area_costs(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open area cost file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("area cost file is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "area_id,cost")
        throw std::runtime_error("area cost file must start with header 'area_id,cost'");

    std::map<int, double> costs;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string area_str, cost_str;
        if (!std::getline(row, area_str, ',') || !std::getline(row, cost_str))
            throw std::runtime_error("area cost file: malformed line " + std::to_string(line_no));
        const int area = std::stoi(area_str);
        const double cost = std::stod(cost_str);
        if (area < 0)
            throw std::runtime_error("area cost file: negative area_id on line " +
                                     std::to_string(line_no));
        if (!(cost >= 1.0 && cost <= 100.0))
            throw std::runtime_error("area cost file: cost outside [1, 100] on line " +
                                     std::to_string(line_no));
        if (!costs.emplace(area, cost).second)
            throw std::runtime_error("area cost file: duplicate area_id on line " +
                                     std::to_string(line_no));
    }
    if (costs.empty()) throw std::runtime_error("area cost file defines no areas");
    return costs;
}

double tour_length(const std::vector<GeoPoint>& stops, DistanceMetric metric, bool with_return) {
    double total = 0.0;
    for (size_t i = 1; i < stops.size(); ++i)
        total += geo_distance(stops[i - 1], stops[i], metric);
    if (with_return && stops.size() >= 2)
        total += geo_distance(stops.back(), stops.front(), metric);
    return total;
}

CostVariant cost_variant_from_string(const std::string& name) {
    if (name == "none") return CostVariant::none;
    if (name == "distance") return CostVariant::distance;
    if (name == "distance-return" || name == "distance_return") return CostVariant::distance_return;
    if (name == "area" || name == "area_cost") return CostVariant::area_cost;
    throw std::invalid_argument("unknown cost variant: " + name);
}

std::string to_string(CostVariant variant) {
    switch (variant) {
        case CostVariant::none: return "none";
        case CostVariant::distance: return "distance";
        case CostVariant::distance_return: return "distance_return";
        case CostVariant::area_cost: return "area_cost";
    }
    return "unknown";
}

}  // namespace conbatch
