#include "conbatch/cli.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "CLI11.hpp"
#include "conbatch/report.hpp"
#include "conbatch/runner.hpp"

namespace conbatch {

namespace {

int worker_count() {
    const char* env = std::getenv("CONBATCH_WORKERS");
    if (env == nullptr) return 1;
    const int w = std::atoi(env);
    return w >= 1 ? w : 1;
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
    return j;
}

void print_dataset_summary(const Dataset& ds, const SplitState& splits, const std::string& name) {
    std::cout << "dataset         " << name << "\n"
              << "samples         " << ds.n_samples() << "\n"
              << "embedding dim   " << ds.dim() << "\n"
              << "classes         " << ds.class_count << "\n"
              << "train/test/pool " << splits.train_idx.size() << "/" << splits.test_idx.size()
              << "/" << splits.pool_idx.size() << "\n"
              << "area ids        " << (ds.has_area_ids() ? "yes" : "no") << "\n";
}

struct RunFlags {
    std::string config_file, dataset_dir, synth_file, strategy, cost, metric, budget, out,
        area_costs;
    int batch_size = 0, iterations = 0, draws = 0, epochs = 0, eval_stride = 0, cap = 0,
        n_sim = 0;
    double stop_at = 0.0;
    uint64_t synth_seed = 0;
    std::vector<uint64_t> seeds;
    bool no_timing = false;
};

int cmd_run(CLI::App* cmd, const RunFlags& flags) {
    RunConfig config;
    std::string out_dir = flags.out;
    std::vector<uint64_t> seeds = flags.seeds;

    if (cmd->count("--config") > 0) {
        const nlohmann::json j = read_json_file(flags.config_file);
        config = run_config_from_json(j);
        if (seeds.empty() && j.contains("seeds"))
            seeds = j.at("seeds").get<std::vector<uint64_t>>();
        if (out_dir.empty() && j.contains("out")) out_dir = j.at("out").get<std::string>();
    }

    if (cmd->count("--dataset") > 0) {
        config.dataset_dir = flags.dataset_dir;
        config.synth.reset();
    }
    if (cmd->count("--synth") > 0) {
        config.synth = synth_spec_from_json(read_json_file(flags.synth_file).dump());
        config.dataset_dir.clear();
    }
    if (cmd->count("--strategy") > 0) config.strategy = strategy_from_string(flags.strategy);
    if (cmd->count("--cost") > 0) config.cost_variant = cost_variant_from_string(flags.cost);
    if (cmd->count("--metric") > 0) {
        if (flags.metric == "haversine")
            config.metric = DistanceMetric::haversine;
        else if (flags.metric == "euclidean")
            config.metric = DistanceMetric::planar_euclidean;
        else
            throw std::invalid_argument("--metric must be haversine or euclidean");
    }
    if (cmd->count("--budget") > 0) {
        if (flags.budget == "inf")
            config.budget = std::numeric_limits<double>::infinity();
        else
            config.budget = std::stod(flags.budget);
    }
    if (cmd->count("--batch-size") > 0) config.n_max = flags.batch_size;
    if (cmd->count("--iterations") > 0) config.iterations = flags.iterations;
    if (cmd->count("--draws") > 0) config.n_draws = flags.draws;
    if (cmd->count("--epochs") > 0) config.model.epochs = flags.epochs;
    if (cmd->count("--eval-stride") > 0) config.eval_stride = flags.eval_stride;
    if (cmd->count("--stop-at-accuracy") > 0) config.stop_at_accuracy = flags.stop_at;
    if (cmd->count("--cap") > 0) config.exact_config_cap = flags.cap;
    if (cmd->count("--n-sim") > 0) config.n_sim = flags.n_sim;
    if (cmd->count("--area-costs") > 0) config.area_costs_file = flags.area_costs;
    if (cmd->count("--synth-seed") > 0) config.synth_seed = flags.synth_seed;
    if (flags.no_timing) config.record_timing = false;

    if (seeds.empty()) seeds.push_back(0);
    if (out_dir.empty()) throw std::invalid_argument("--out is required");
    validate_run_config(config);

    // Pre-flight: surface dataset and cost-map problems before any training.
    try {
        auto [ds, splits] = config.dataset_dir.empty()
                                ? gen_synthetic(*config.synth, config.synth_seed)
                                : load_dataset(config.dataset_dir);
        if (config.cost_variant == CostVariant::area_cost && config.area_costs_file.empty() &&
            !ds.has_area_ids())
            throw std::invalid_argument("cost variant 'area' needs area ids or an area cost file");
        if (splits.pool_idx.empty()) throw std::invalid_argument("dataset has an empty pool");
    } catch (const std::runtime_error& e) {
        throw std::invalid_argument(e.what());
    }

    const int workers = std::min<int>(worker_count(), static_cast<int>(seeds.size()));
    std::atomic<size_t> next{0};
    std::mutex io_mutex;
    std::vector<std::string> failures;

    auto work = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= seeds.size()) return;
            const uint64_t seed = seeds[i];
            try {
                const RunSeries series = run_experiment(config, seed);
                const std::filesystem::path path =
                    std::filesystem::path(out_dir) / result_filename(config, seed);
                write_series(series, path);
                std::lock_guard<std::mutex> lock(io_mutex);
                std::cout << "wrote " << path.string() << " (" << series.records.size()
                          << " iterations)";
                if (series.aborted) std::cout << " [aborted: " << series.abort_reason << "]";
                std::cout << "\n";
                if (series.aborted) failures.push_back("seed " + std::to_string(seed) + ": " +
                                                       series.abort_reason);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(io_mutex);
                failures.push_back("seed " + std::to_string(seed) + ": " + e.what());
            }
        }
    };

    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    if (!failures.empty()) {
        for (const std::string& f : failures) std::cerr << "run failed: " << f << "\n";
        return 2;
    }
    return 0;
}

int cmd_synth(const std::string& spec_file, const std::string& emit_spec, uint64_t seed,
              const std::string& out_dir) {
    if (!emit_spec.empty()) {
        std::ofstream out(emit_spec, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + emit_spec);
        out << nlohmann::json::parse(synth_spec_to_json(SynthSpec{})).dump(2) << '\n';
        std::cout << "wrote " << emit_spec << "\n";
        return 0;
    }
    if (out_dir.empty()) throw std::invalid_argument("--out is required");
    SynthSpec spec;
    if (!spec_file.empty()) spec = synth_spec_from_json(read_json_file(spec_file).dump());
    auto [ds, splits] = gen_synthetic(spec, seed);
    write_dataset(ds, splits, out_dir);
    print_dataset_summary(ds, splits, out_dir);
    return 0;
}

int cmd_validate(const std::string& dir) {
    std::vector<Finding> findings;
    Dataset ds;
    SplitState splits;
    try {
        std::tie(ds, splits) = load_dataset_lenient(dir, findings);
    } catch (const std::exception& e) {
        std::cerr << "ERROR: " << e.what() << "\n";
        return 1;
    }
    bool has_error = false;
    for (const Finding& f : findings) {
        if (f.severity == Severity::error) {
            has_error = true;
            std::cout << "ERROR: " << f.message << "\n";
        } else {
            std::cout << "WARNING: " << f.message << "\n";
        }
    }
    print_dataset_summary(ds, splits, dir);
    return has_error ? 1 : 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::vector<double>& targets,
               int window, bool svg, const std::string& out_dir) {
    ReportSpec spec;
    for (const std::string& input : inputs) {
        const std::filesystem::path p(input);
        if (std::filesystem::is_directory(p)) {
            for (const auto& entry : std::filesystem::directory_iterator(p))
                if (entry.path().extension() == ".json") spec.inputs.push_back(entry.path());
        } else {
            spec.inputs.push_back(p);
        }
    }
    std::sort(spec.inputs.begin(), spec.inputs.end());
    spec.targets = targets;
    spec.window = window;
    spec.emit_svg = svg;
    spec.out_dir = out_dir;
    for (const auto& path : write_report(spec)) std::cout << "wrote " << path.string() << "\n";
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Budget-constrained batch Bayesian active learning"};
    app.require_subcommand(1);

    RunFlags rf;
    CLI::App* run = app.add_subcommand("run", "Run active-learning experiments");
    run->add_option("--config", rf.config_file, "JSON config file; explicit flags override it");
    run->add_option("--dataset", rf.dataset_dir, "Dataset directory");
    run->add_option("--synth", rf.synth_file, "Synthetic dataset spec (JSON)");
    run->add_option("--strategy", rf.strategy, "random|greedy|threshold|batchbald");
    run->add_option("--cost", rf.cost, "none|distance|distance-return|area");
    run->add_option("--metric", rf.metric, "haversine|euclidean");
    run->add_option("--budget", rf.budget, "Per-batch budget (number or 'inf')");
    run->add_option("--batch-size", rf.batch_size, "Acquisitions per batch (n_max)");
    run->add_option("--iterations", rf.iterations, "Active-learning iterations");
    run->add_option("--seeds", rf.seeds, "Seeds, comma separated")->delimiter(',');
    run->add_option("--out", rf.out, "Output directory for result files");
    run->add_option("--draws", rf.draws, "MC-dropout forward passes (T)");
    run->add_option("--epochs", rf.epochs, "Training epochs per iteration");
    run->add_option("--eval-stride", rf.eval_stride, "Evaluate every Nth iteration");
    run->add_option("--stop-at-accuracy", rf.stop_at, "Stop once test accuracy reaches this");
    run->add_option("--cap", rf.cap, "Exact joint-entropy configuration cap");
    run->add_option("--n-sim", rf.n_sim, "Sampled-estimator configuration draws");
    run->add_option("--area-costs", rf.area_costs, "areas.csv override for the area cost model");
    run->add_option("--synth-seed", rf.synth_seed, "Synthetic dataset generation seed");
    run->add_flag("--no-timing", rf.no_timing, "Pin wall_ms to 0 for byte-stable outputs");

    std::string synth_spec_file, synth_emit, synth_out;
    uint64_t synth_seed = 1;
    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic dataset directory");
    synth->add_option("--spec", synth_spec_file, "Synthetic spec JSON (defaults when omitted)");
    synth->add_option("--seed", synth_seed, "Generation seed");
    synth->add_option("--out", synth_out, "Output dataset directory");
    synth->add_option("--emit-spec", synth_emit, "Write the default spec template and exit");

    std::string validate_dir;
    CLI::App* validate = app.add_subcommand("validate", "Validate a dataset directory");
    validate->add_option("dir", validate_dir, "Dataset directory")->required();

    std::vector<std::string> report_inputs;
    std::vector<double> report_targets;
    int report_window = 1;
    bool report_svg = false;
    std::string report_out;
    CLI::App* report = app.add_subcommand("report", "Aggregate result files into curves/tables");
    report->add_option("inputs", report_inputs, "Result files or directories")->required();
    report->add_option("--targets", report_targets, "Accuracy targets, comma separated")
        ->delimiter(',');
    report->add_option("--window", report_window, "Trailing moving-average window");
    report->add_flag("--svg", report_svg, "Also emit an SVG line chart");
    report->add_option("--out", report_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (run->parsed()) return cmd_run(run, rf);
        if (synth->parsed()) return cmd_synth(synth_spec_file, synth_emit, synth_seed, synth_out);
        if (validate->parsed()) return cmd_validate(validate_dir);
        if (report->parsed())
            return cmd_report(report_inputs, report_targets, report_window, report_svg,
                              report_out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace conbatch
