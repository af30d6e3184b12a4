#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <numeric>

#include "conbatch/acquisition.hpp"
#include "conbatch/cost.hpp"
#include "conbatch/runner.hpp"

namespace py = pybind11;
using namespace conbatch;

namespace {

using CubeArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

PredictiveCube cube_from_array(const CubeArray& arr) {
    if (arr.ndim() != 3) throw std::invalid_argument("cube must have shape (M, T, K)");
    PredictiveCube cube;
    cube.n_points = static_cast<int>(arr.shape(0));
    cube.n_draws = static_cast<int>(arr.shape(1));
    cube.n_classes = static_cast<int>(arr.shape(2));
    cube.probs.resize(static_cast<Eigen::Index>(cube.n_points) * cube.n_draws, cube.n_classes);
    std::memcpy(cube.probs.data(), arr.data(),
                sizeof(double) * static_cast<size_t>(arr.size()));
    cube.sample_index_map.resize(cube.n_points);
    std::iota(cube.sample_index_map.begin(), cube.sample_index_map.end(), 0);
    return cube;
}

JointState state_for(const PredictiveCube& cube, const std::vector<int>& selected,
                     const ScoreOptions& opts) {
    JointState state = make_initial_state(cube);
    for (int m : selected) state = accept_candidate(state, cube, m, opts);
    return state;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Budget-constrained batch Bayesian active learning core";

    m.def(
        "entropy",
        [](const std::vector<double>& p) {
            Eigen::RowVectorXd v =
                Eigen::Map<const Eigen::RowVectorXd>(p.data(), static_cast<Eigen::Index>(p.size()));
            return entropy(v);
        },
        py::arg("p"), "Shannon entropy in nats of one probability vector");

    m.def(
        "conditional_entropy",
        [](const CubeArray& cube, int point) {
            return conditional_entropy_term(cube_from_array(cube), point);
        },
        py::arg("cube"), py::arg("point"),
        "Mean over draws of the per-draw entropy for one cube point");

    m.def(
        "batch_mutual_information",
        [](const CubeArray& cube, const std::vector<int>& batch, int exact_config_cap, int n_sim,
           uint64_t seed) {
            ScoreOptions opts;
            opts.exact_config_cap = exact_config_cap;
            opts.n_sim = n_sim;
            return batch_mutual_information(cube_from_array(cube), batch, opts, seed);
        },
        py::arg("cube"), py::arg("batch"), py::arg("exact_config_cap") = 10000,
        py::arg("n_sim") = 8000, py::arg("seed") = 0,
        "BatchBALD mutual information of an ordered batch");

    m.def(
        "score_candidates",
        [](const CubeArray& cube, const std::vector<int>& selected,
           const std::vector<int>& candidates, int exact_config_cap, int n_sim, uint64_t seed) {
            ScoreOptions opts;
            opts.exact_config_cap = exact_config_cap;
            opts.n_sim = n_sim;
            const PredictiveCube c = cube_from_array(cube);
            return score_candidates(state_for(c, selected, opts), c, candidates, opts, seed);
        },
        py::arg("cube"), py::arg("selected"), py::arg("candidates"),
        py::arg("exact_config_cap") = 10000, py::arg("n_sim") = 8000, py::arg("seed") = 0,
        "Batch-MI score of each candidate appended to the selected batch");

    m.def(
        "run_experiment",
        [](const std::string& config_json, uint64_t seed) {
            const RunConfig config = run_config_from_json(nlohmann::json::parse(config_json));
            return series_to_json(run_experiment(config, seed)).dump();
        },
        py::arg("config_json"), py::arg("seed") = 0,
        "Full active-learning run; takes and returns JSON strings");

    m.def(
        "generate_dataset",
        [](const std::string& spec_json, uint64_t seed, const std::string& out_dir) {
            const SynthSpec spec = synth_spec_from_json(spec_json);
            auto [ds, splits] = gen_synthetic(spec, seed);
            write_dataset(ds, splits, out_dir);
        },
        py::arg("spec_json"), py::arg("seed"), py::arg("out_dir"),
        "Generate a synthetic dataset directory");

    m.def(
        "validate_dataset",
        [](const std::string& dir) {
            std::vector<Finding> findings;
            load_dataset_lenient(dir, findings);
            std::vector<std::pair<std::string, std::string>> out;
            for (const Finding& f : findings)
                out.emplace_back(f.severity == Severity::error ? "error" : "warning", f.message);
            return out;
        },
        py::arg("dir"), "Returns (severity, message) findings for a dataset directory");

    m.def(
        "haversine_m",
        [](double lat1, double lon1, double lat2, double lon2) {
            return haversine(GeoPoint{lat1, lon1}, GeoPoint{lat2, lon2});
        },
        py::arg("lat1"), py::arg("lon1"), py::arg("lat2"), py::arg("lon2"),
        "Great-circle distance in meters");

    m.attr("__version__") = "0.1.0";
}
