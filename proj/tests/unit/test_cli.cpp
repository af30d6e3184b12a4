#include <algorithm>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <string>
#include <vector>

#include "conbatch/cli.hpp"
#include "conbatch/data.hpp"
#include "conbatch/runner.hpp"
#include "conbatch/synth.hpp"
#include "doctest.h"

using namespace conbatch;

namespace {

namespace fs = std::filesystem;

int cli(std::initializer_list<std::string> args) {
    std::vector<std::string> strings{"conbatch"};
    strings.insert(strings.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    argv.reserve(strings.size());
    for (const std::string& s : strings) argv.push_back(s.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    out << text;
}

std::string small_run_config() {
    return R"({
  "synth": {
    "n_samples": 60, "dim": 4, "class_count": 2, "cluster_spread": 0.3,
    "geo_bbox": [51.85, 52.0, 4.4, 4.6], "area_grid": [4, 4],
    "split_fractions": [0.2, 0.3, 0.5]
  },
  "strategy": "greedy", "cost": "none", "budget": "inf",
  "batch_size": 2, "iterations": 2, "n_draws": 4, "record_timing": false,
  "model": {"hidden_layers": 1, "width": 8, "epochs": 3, "minibatch": 8, "lr": 0.01}
})";
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

RunSeries stub_series(uint64_t seed, double final_acc) {
    RunSeries s;
    s.config = {{"strategy", "greedy"}, {"cost", "none"}, {"budget", "inf"}, {"dataset", "d"}};
    s.seed = seed;
    for (int i = 1; i <= 2; ++i) {
        IterationRecord r;
        r.iteration = i;
        r.test_accuracy = i == 2 ? final_acc : 0.3;
        r.batch_size = 2;
        r.cumulative_samples = 2 * i;
        r.cumulative_cost = 5.0 * i;
        r.train_size = 10 + 2 * i;
        s.records.push_back(r);
    }
    return s;
}

}  // namespace

TEST_CASE("help and parse errors map to the documented exit codes") {
    CHECK(cli({"--help"}) == 0);
    CHECK(cli({"run", "--help"}) == 0);
    CHECK(cli({}) == 1);                       // a subcommand is required
    CHECK(cli({"frobnicate"}) == 1);           // unknown subcommand
    CHECK(cli({"run", "--bogus-flag"}) == 1);  // unknown flag
}

TEST_CASE("synth generates a dataset directory that validates cleanly") {
    const fs::path dir = fresh_dir("conbatch_cli_synth");
    const fs::path out = dir / "ds";
    CHECK(cli({"synth", "--seed", "5", "--out", out.string()}) == 0);
    CHECK(fs::exists(out / "embeddings.f32"));
    CHECK(fs::exists(out / "manifest.json"));
    CHECK(cli({"validate", out.string()}) == 0);
    fs::remove_all(dir);
}

TEST_CASE("synth --emit-spec writes a template") {
    const fs::path dir = fresh_dir("conbatch_cli_spec");
    const fs::path spec = dir / "spec.json";
    CHECK(cli({"synth", "--emit-spec", spec.string()}) == 0);
    const SynthSpec parsed = synth_spec_from_json(slurp(spec));
    CHECK(parsed.n_samples == SynthSpec{}.n_samples);
    fs::remove_all(dir);
}

TEST_CASE("run executes a config file and writes one result per seed") {
    const fs::path dir = fresh_dir("conbatch_cli_run");
    const fs::path cfg = dir / "cfg.json";
    write_text(cfg, small_run_config());
    const fs::path out = dir / "results";

    CHECK(cli({"run", "--config", cfg.string(), "--out", out.string(), "--seeds", "0,1"}) == 0);
    CHECK(fs::exists(out / "greedy_none_inf_seed0.json"));
    CHECK(fs::exists(out / "greedy_none_inf_seed1.json"));

    const RunSeries series = load_series(out / "greedy_none_inf_seed0.json");
    CHECK(series.records.size() == 2);
    CHECK(series.seed == 0);
    CHECK(series.records[0].batch_size == 2);
    fs::remove_all(dir);
}

TEST_CASE("run flags override the config file") {
    const fs::path dir = fresh_dir("conbatch_cli_override");
    const fs::path cfg = dir / "cfg.json";
    write_text(cfg, small_run_config());
    const fs::path out = dir / "results";

    CHECK(cli({"run", "--config", cfg.string(), "--out", out.string(), "--strategy", "random",
               "--iterations", "1"}) == 0);
    CHECK(fs::exists(out / "random_none_inf_seed0.json"));
    const RunSeries series = load_series(out / "random_none_inf_seed0.json");
    CHECK(series.records.size() == 1);
    fs::remove_all(dir);
}

TEST_CASE("configuration errors exit with code 1") {
    const fs::path dir = fresh_dir("conbatch_cli_cfgerr");
    const fs::path cfg = dir / "cfg.json";
    write_text(cfg, small_run_config());
    const fs::path out = dir / "results";

    // unknown strategy name
    CHECK(cli({"run", "--config", cfg.string(), "--out", out.string(), "--strategy",
               "teleport"}) == 1);
    // missing output directory
    CHECK(cli({"run", "--config", cfg.string()}) == 1);
    // unreadable config
    CHECK(cli({"run", "--config", (dir / "absent.json").string(), "--out", out.string()}) == 1);
    // batchbald with a finite budget
    CHECK(cli({"run", "--config", cfg.string(), "--out", out.string(), "--strategy", "batchbald",
               "--budget", "50"}) == 1);
    fs::remove_all(dir);
}

TEST_CASE("area cost runs need area ids or an override file") {
    const fs::path dir = fresh_dir("conbatch_cli_area");
    SynthSpec spec;
    spec.n_samples = 40;
    spec.dim = 3;
    spec.class_count = 2;
    spec.split_fractions = {0.2, 0.3, 0.5};
    auto [ds, splits] = gen_synthetic(spec, 2);
    std::fill(ds.area_ids.begin(), ds.area_ids.end(), -1);  // strip the area layer
    const fs::path data_dir = dir / "ds";
    write_dataset(ds, splits, data_dir);

    const fs::path out = dir / "results";
    CHECK(cli({"run", "--dataset", data_dir.string(), "--cost", "area", "--budget", "100",
               "--iterations", "1", "--epochs", "2", "--draws", "3", "--out", out.string()}) ==
          1);
    fs::remove_all(dir);
}

TEST_CASE("validate reports structural problems with exit 1") {
    const fs::path dir = fresh_dir("conbatch_cli_broken");
    write_text(dir / "manifest.json", "{ not json");
    CHECK(cli({"validate", dir.string()}) == 1);
    fs::remove_all(dir);
}

TEST_CASE("report aggregates result files from a directory") {
    const fs::path dir = fresh_dir("conbatch_cli_report");
    const fs::path in = dir / "in";
    fs::create_directories(in);
    write_series(stub_series(0, 0.6), in / "a.json");
    write_series(stub_series(1, 0.8), in / "b.json");
    const fs::path out = dir / "out";

    CHECK(cli({"report", in.string(), "--targets", "0.5,0.9", "--out", out.string()}) == 0);
    const std::string curves = slurp(out / "curves.csv");
    CHECK(curves.find("greedy_none_inf") != std::string::npos);
    const std::string targets = slurp(out / "targets.csv");
    CHECK(targets.find("not reached") != std::string::npos);

    CHECK(cli({"report", in.string(), "--out", out.string(), "--svg"}) == 0);
    CHECK(fs::exists(out / "curves.svg"));
    fs::remove_all(dir);
}

TEST_CASE("runtime failures exit with code 2") {
    const fs::path dir = fresh_dir("conbatch_cli_rt");
    const fs::path cfg = dir / "cfg.json";
    write_text(cfg, small_run_config());
    write_text(dir / "blocker", "plain file");
    // the output path sits under a regular file: writing results must fail
    const fs::path out = dir / "blocker" / "sub";
    CHECK(cli({"run", "--config", cfg.string(), "--out", out.string()}) == 2);
    fs::remove_all(dir);
}
