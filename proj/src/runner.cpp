#include "conbatch/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include "conbatch/acquisition.hpp"
#include "conbatch/posterior.hpp"
#include "conbatch/rng.hpp"

namespace conbatch {

namespace {

std::string format_budget(double budget) {
    if (std::isinf(budget)) return "inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", budget);
    return buf;
}

double parse_budget(const nlohmann::json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
        return std::stod(j.get<std::string>());
    }
    return j.get<double>();
}

std::pair<Dataset, SplitState> load_run_data(const RunConfig& config) {
    if (!config.dataset_dir.empty()) return load_dataset(config.dataset_dir);
    return gen_synthetic(*config.synth, config.synth_seed);
}

std::string metric_name(DistanceMetric metric) {
    return metric == DistanceMetric::haversine ? "haversine" : "euclidean";
}

DistanceMetric metric_from_name(const std::string& name) {
    if (name == "haversine") return DistanceMetric::haversine;
    if (name == "euclidean") return DistanceMetric::planar_euclidean;
    throw std::invalid_argument("unknown distance metric: " + name);
}

}  // namespace

void validate_run_config(const RunConfig& config) {
    const bool has_dir = !config.dataset_dir.empty();
    const bool has_synth = config.synth.has_value();
    if (has_dir == has_synth)
        throw std::invalid_argument("config must name exactly one of dataset directory or synth spec");
    if (config.iterations < 1) throw std::invalid_argument("iterations must be >= 1");
    if (config.n_max < 1) throw std::invalid_argument("batch size must be >= 1");
    if (config.n_draws < 1) throw std::invalid_argument("forward passes must be >= 1");
    if (!(config.budget > 0.0)) throw std::invalid_argument("budget must be positive or inf");
    if (config.strategy == StrategyKind::batchbald_unconstrained && std::isfinite(config.budget))
        throw std::invalid_argument("strategy batchbald requires an infinite budget");
    if (config.exact_config_cap < 1) throw std::invalid_argument("exact_config_cap must be >= 1");
    if (config.n_sim < 1) throw std::invalid_argument("n_sim must be >= 1");
    if (config.eval_stride < 1) throw std::invalid_argument("eval stride must be >= 1");
    if (config.stop_at_accuracy < 0.0 || config.stop_at_accuracy > 1.0)
        throw std::invalid_argument("stop_at_accuracy must lie in [0, 1]");
    if (config.model.epochs < 0) throw std::invalid_argument("epochs must be >= 0");
    if (config.model.minibatch < 1) throw std::invalid_argument("minibatch must be >= 1");
}

RunSeries run_experiment(const RunConfig& config, uint64_t seed) {
    validate_run_config(config);
    auto [dataset, splits] = load_run_data(config);

    ModelConfig model = config.model;
    model.input_dim = static_cast<int>(dataset.dim());
    model.class_count = dataset.class_count;

    CostModel cost_model;
    cost_model.variant = config.cost_variant;
    cost_model.metric = config.metric;
    if (config.cost_variant == CostVariant::area_cost) {
        if (!config.area_costs_file.empty())
            cost_model.area_costs = load_area_costs(config.area_costs_file);
        else if (dataset.has_area_ids())
            cost_model.area_costs = build_area_costs(dataset);
        else
            throw std::invalid_argument("cost variant 'area' needs area ids or an area cost file");
    }

    ScoreOptions score_opts;
    score_opts.exact_config_cap = config.exact_config_cap;
    score_opts.n_sim = config.n_sim;

    RunSeries series;
    series.seed = seed;
    series.config = run_config_to_json(config);
    series.config["resolved_input_dim"] = model.input_dim;
    series.config["resolved_class_count"] = model.class_count;

    long cumulative_samples = 0;
    double cumulative_cost = 0.0;

    for (int it = 1; it <= config.iterations; ++it) {
        const auto t0 = std::chrono::steady_clock::now();

        Network net = init_network(model, derive_seed(seed, it, "init"));
        try {
            net = train(net, dataset, splits.train_idx, model, derive_seed(seed, it, "train"));
        } catch (const std::runtime_error& e) {
            series.aborted = true;
            series.abort_reason = e.what();
            break;
        }

        IterationRecord rec;
        rec.iteration = it;

        const bool eval_due = (it - 1) % config.eval_stride == 0;
        if (eval_due) {
            const PredictiveCube test_cube =
                sample_posterior(net, dataset, splits.test_idx, config.n_draws,
                                 model.dropout_rate, derive_seed(seed, it, "eval"));
            std::vector<int> test_labels(splits.test_idx.size());
            for (size_t i = 0; i < splits.test_idx.size(); ++i)
                test_labels[i] = dataset.labels[splits.test_idx[i]];
            rec.test_accuracy = evaluate_accuracy(test_cube, test_labels);
        }

        const PredictiveCube pool_cube =
            sample_posterior(net, dataset, splits.pool_idx, config.n_draws, model.dropout_rate,
                             derive_seed(seed, it, "posterior"));
        const BatchResult batch =
            select_batch(config.strategy, pool_cube, splits.pool_idx, cost_model, dataset,
                         config.budget, config.n_max, score_opts, derive_seed(seed, it, "select"));

        if (!batch.selected.empty()) {
            if (!batch.step_scores.empty()) {
                rec.batch_mutual_information = batch.step_scores.back();
            } else {
                std::unordered_map<int, int> position;
                position.reserve(splits.pool_idx.size());
                for (size_t m = 0; m < splits.pool_idx.size(); ++m)
                    position[splits.pool_idx[m]] = static_cast<int>(m);
                std::vector<int> cube_batch;
                cube_batch.reserve(batch.selected.size());
                for (int row : batch.selected) cube_batch.push_back(position.at(row));
                rec.batch_mutual_information = batch_mutual_information(
                    pool_cube, cube_batch, score_opts, derive_seed(seed, it, "mi"));
            }
        }

        splits = apply_acquisition(splits, batch.selected);
        cumulative_samples += static_cast<long>(batch.selected.size());
        cumulative_cost += batch.total_cost;

        rec.batch_indices = batch.selected;
        rec.batch_marginal_costs = batch.step_costs;
        rec.batch_total_cost = batch.total_cost;
        rec.batch_size = static_cast<int>(batch.selected.size());
        rec.cumulative_samples = cumulative_samples;
        rec.cumulative_cost = cumulative_cost;
        rec.train_size = static_cast<int>(splits.train_idx.size());
        if (config.record_timing) {
            rec.wall_ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
        }
        series.records.push_back(std::move(rec));

        if (config.stop_at_accuracy > 0.0 && eval_due &&
            series.records.back().test_accuracy >= config.stop_at_accuracy) {
            series.stopped_early = true;
            break;
        }
        if (splits.pool_idx.empty()) {
            series.pool_exhausted = true;
            break;
        }
    }
    return series;
}

nlohmann::json run_config_to_json(const RunConfig& config) {
    nlohmann::json j;
    if (!config.dataset_dir.empty()) {
        j["dataset"] = config.dataset_dir;
    } else {
        j["synth"] = nlohmann::json::parse(synth_spec_to_json(*config.synth));
        j["synth_seed"] = config.synth_seed;
    }
    j["strategy"] = to_string(config.strategy);
    j["cost"] = to_string(config.cost_variant);
    j["metric"] = metric_name(config.metric);
    if (!config.area_costs_file.empty()) j["area_costs_file"] = config.area_costs_file;
    j["budget"] = std::isinf(config.budget) ? nlohmann::json("inf") : nlohmann::json(config.budget);
    j["batch_size"] = config.n_max;
    j["iterations"] = config.iterations;
    j["n_draws"] = config.n_draws;
    j["exact_config_cap"] = config.exact_config_cap;
    j["n_sim"] = config.n_sim;
    j["eval_stride"] = config.eval_stride;
    j["stop_at_accuracy"] = config.stop_at_accuracy;
    j["record_timing"] = config.record_timing;
    j["model"] = {
        {"hidden_layers", config.model.hidden_layers},
        {"width", config.model.width},
        {"dropout_rate", config.model.dropout_rate},
        {"lr", config.model.lr},
        {"weight_decay", config.model.weight_decay},
        {"epochs", config.model.epochs},
        {"minibatch", config.model.minibatch},
        {"adam", {{"beta1", 0.9}, {"beta2", 0.999}, {"eps", 1e-8}, {"schedule", "constant"}}},
    };
    return j;
}

RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig config;
    if (j.contains("dataset")) config.dataset_dir = j.at("dataset").get<std::string>();
    if (j.contains("synth")) {
        config.synth = synth_spec_from_json(j.at("synth").dump());
        config.synth_seed = j.value("synth_seed", config.synth_seed);
    }
    if (j.contains("strategy")) config.strategy = strategy_from_string(j.at("strategy"));
    if (j.contains("cost")) config.cost_variant = cost_variant_from_string(j.at("cost"));
    if (j.contains("metric")) config.metric = metric_from_name(j.at("metric"));
    if (j.contains("area_costs_file"))
        config.area_costs_file = j.at("area_costs_file").get<std::string>();
    if (j.contains("budget")) config.budget = parse_budget(j.at("budget"));
    config.n_max = j.value("batch_size", config.n_max);
    config.iterations = j.value("iterations", config.iterations);
    config.n_draws = j.value("n_draws", config.n_draws);
    config.exact_config_cap = j.value("exact_config_cap", config.exact_config_cap);
    config.n_sim = j.value("n_sim", config.n_sim);
    config.eval_stride = j.value("eval_stride", config.eval_stride);
    config.stop_at_accuracy = j.value("stop_at_accuracy", config.stop_at_accuracy);
    config.record_timing = j.value("record_timing", config.record_timing);
    if (j.contains("model")) {
        const auto& m = j.at("model");
        config.model.hidden_layers = m.value("hidden_layers", config.model.hidden_layers);
        config.model.width = m.value("width", config.model.width);
        config.model.dropout_rate = m.value("dropout_rate", config.model.dropout_rate);
        config.model.lr = m.value("lr", config.model.lr);
        config.model.weight_decay = m.value("weight_decay", config.model.weight_decay);
        config.model.epochs = m.value("epochs", config.model.epochs);
        config.model.minibatch = m.value("minibatch", config.model.minibatch);
    }
    return config;
}

nlohmann::json series_to_json(const RunSeries& series) {
    nlohmann::json j;
    j["config"] = series.config;
    j["seed"] = series.seed;
    j["pool_exhausted"] = series.pool_exhausted;
    j["stopped_early"] = series.stopped_early;
    j["aborted"] = series.aborted;
    j["abort_reason"] = series.abort_reason;
    j["records"] = nlohmann::json::array();
    for (const IterationRecord& rec : series.records) {
        nlohmann::json r;
        r["iteration"] = rec.iteration;
        if (std::isnan(rec.test_accuracy))
            r["test_accuracy"] = nullptr;
        else
            r["test_accuracy"] = rec.test_accuracy;
        r["batch_indices"] = rec.batch_indices;
        r["batch_marginal_costs"] = rec.batch_marginal_costs;
        r["batch_total_cost"] = rec.batch_total_cost;
        r["batch_mutual_information"] = rec.batch_mutual_information;
        r["batch_size"] = rec.batch_size;
        r["cumulative_samples"] = rec.cumulative_samples;
        r["cumulative_cost"] = rec.cumulative_cost;
        r["train_size"] = rec.train_size;
        r["wall_ms"] = rec.wall_ms;
        j["records"].push_back(std::move(r));
    }
    return j;
}

RunSeries series_from_json(const nlohmann::json& j) {
    RunSeries series;
    series.config = j.at("config");
    series.seed = j.at("seed").get<uint64_t>();
    series.pool_exhausted = j.value("pool_exhausted", false);
    series.stopped_early = j.value("stopped_early", false);
    series.aborted = j.value("aborted", false);
    series.abort_reason = j.value("abort_reason", std::string());
    for (const auto& r : j.at("records")) {
        IterationRecord rec;
        rec.iteration = r.at("iteration").get<int>();
        if (!r.at("test_accuracy").is_null())
            rec.test_accuracy = r.at("test_accuracy").get<double>();
        rec.batch_indices = r.at("batch_indices").get<std::vector<int>>();
        rec.batch_marginal_costs = r.at("batch_marginal_costs").get<std::vector<double>>();
        rec.batch_total_cost = r.at("batch_total_cost").get<double>();
        rec.batch_mutual_information = r.at("batch_mutual_information").get<double>();
        rec.batch_size = r.at("batch_size").get<int>();
        rec.cumulative_samples = r.at("cumulative_samples").get<long>();
        rec.cumulative_cost = r.at("cumulative_cost").get<double>();
        rec.train_size = r.at("train_size").get<int>();
        rec.wall_ms = r.at("wall_ms").get<double>();
        series.records.push_back(std::move(rec));
    }
    return series;
}

std::string result_filename(const RunConfig& config, uint64_t seed) {
    return to_string(config.strategy) + "_" + to_string(config.cost_variant) + "_" +
           format_budget(config.budget) + "_seed" + std::to_string(seed) + ".json";
}

void write_series(const RunSeries& series, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write result file: " + tmp.string());
        out << series_to_json(series).dump(2) << '\n';
        if (!out) throw std::runtime_error("short write for result file: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

RunSeries load_series(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read result file: " + path.string());
    nlohmann::json j;
    in >> j;
    return series_from_json(j);
}

std::optional<int> iterations_to_target(const RunSeries& series, double target_acc) {
    if (!(target_acc > 0.0 && target_acc <= 1.0))
        throw std::invalid_argument("target accuracy must lie in (0, 1]");
    for (const IterationRecord& rec : series.records)
        if (!std::isnan(rec.test_accuracy) && rec.test_accuracy >= target_acc)
            return rec.iteration;
    return std::nullopt;
}

std::optional<SamplesCost> samples_and_cost_to_target(const RunSeries& series,
                                                      double target_acc) {
    if (!(target_acc > 0.0 && target_acc <= 1.0))
        throw std::invalid_argument("target accuracy must lie in (0, 1]");
    for (const IterationRecord& rec : series.records)
        if (!std::isnan(rec.test_accuracy) && rec.test_accuracy >= target_acc)
            return SamplesCost{rec.cumulative_samples, rec.cumulative_cost};
    return std::nullopt;
}

}  // namespace conbatch
