#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "conbatch/runner.hpp"

namespace conbatch {

struct ReportSpec {
    std::vector<std::filesystem::path> inputs;
    std::vector<double> targets;
    int window = 1;  // trailing moving-average width in evaluated points
    bool emit_svg = false;
    std::filesystem::path out_dir;
};

struct CurvePoint {
    int iteration = 0;
    double mean = 0.0;
    double stddev = 0.0;  // sample std over seeds, 0 for a single seed
    int n_seeds = 0;
};

// group label "<strategy>_<cost>_<budget>" -> aggregated accuracy curve
using CurveSet = std::map<std::string, std::vector<CurvePoint>>;

CurveSet aggregate_curves(const std::vector<RunSeries>& series, int window);

// Writes curves.csv, targets.csv and optionally curves.svg; refuses inputs
// from different datasets. Returns the files written.
std::vector<std::filesystem::path> write_report(const ReportSpec& spec);

}  // namespace conbatch
