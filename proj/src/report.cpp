#include "conbatch/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace conbatch {

namespace {

std::string budget_label(const nlohmann::json& budget) {
    if (budget.is_string()) return budget.get<std::string>();
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", budget.get<double>());
    return buf;
}

std::string group_label(const RunSeries& series) {
    return series.config.at("strategy").get<std::string>() + "_" +
           series.config.at("cost").get<std::string>() + "_" +
           budget_label(series.config.at("budget"));
}

nlohmann::json dataset_identity(const RunSeries& series) {
    if (series.config.contains("dataset")) return series.config.at("dataset");
    nlohmann::json id;
    id["synth"] = series.config.at("synth");
    if (series.config.contains("synth_seed")) id["synth_seed"] = series.config.at("synth_seed");
    return id;
}

// (iteration, accuracy) for evaluated iterations, trailing-averaged.
std::vector<std::pair<int, double>> smoothed_accuracy(const RunSeries& series, int window) {
    std::vector<std::pair<int, double>> points;
    std::vector<double> values;
    for (const IterationRecord& rec : series.records) {
        if (std::isnan(rec.test_accuracy)) continue;
        values.push_back(rec.test_accuracy);
        const int lo = std::max(0, static_cast<int>(values.size()) - window);
        double acc = 0.0;
        for (size_t i = lo; i < values.size(); ++i) acc += values[i];
        points.emplace_back(rec.iteration, acc / static_cast<double>(values.size() - lo));
    }
    return points;
}

std::string format_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

void write_svg(const CurveSet& curves, const std::filesystem::path& path) {
    const double width = 840, height = 520;
    const double left = 70, right = 30, top = 30, bottom = 60;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    int max_iter = 1;
    for (const auto& [label, curve] : curves)
        for (const CurvePoint& p : curve) max_iter = std::max(max_iter, p.iteration);

    auto x_of = [&](double it) { return left + (it - 1) / std::max(1.0, max_iter - 1.0) * plot_w; };
    auto y_of = [&](double acc) { return top + (1.0 - acc) * plot_h; };

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write svg: " + path.string());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << width << " " << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w
        << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
        << top + plot_h << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 10; ++i) {
        const double acc = i / 10.0;
        out << "<line x1=\"" << left - 4 << "\" y1=\"" << y_of(acc) << "\" x2=\"" << left
            << "\" y2=\"" << y_of(acc) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << left - 8 << "\" y=\"" << y_of(acc) + 4
            << "\" text-anchor=\"end\">" << format_num(acc) << "</text>\n";
    }
    for (int i = 0; i <= 5; ++i) {
        const double it = 1 + i * (max_iter - 1) / 5.0;
        out << "<line x1=\"" << x_of(it) << "\" y1=\"" << top + plot_h << "\" x2=\"" << x_of(it)
            << "\" y2=\"" << top + plot_h + 4 << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << x_of(it) << "\" y=\"" << top + plot_h + 18
            << "\" text-anchor=\"middle\">" << static_cast<int>(std::lround(it)) << "</text>\n";
    }
    out << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 16
        << "\" text-anchor=\"middle\">iteration</text>\n";
    out << "<text x=\"18\" y=\"" << top + plot_h / 2
        << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << top + plot_h / 2
        << ")\">test accuracy</text>\n";

    int color_i = 0;
    double legend_y = top + 10;
    for (const auto& [label, curve] : curves) {
        const char* color = kPalette[color_i % (sizeof kPalette / sizeof *kPalette)];
        ++color_i;
        std::ostringstream pts;
        for (const CurvePoint& p : curve)
            pts << x_of(p.iteration) << "," << y_of(p.mean) << " ";
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\""
            << pts.str() << "\"/>\n";
        out << "<line x1=\"" << left + plot_w - 170 << "\" y1=\"" << legend_y << "\" x2=\""
            << left + plot_w - 150 << "\" y2=\"" << legend_y << "\" stroke=\"" << color
            << "\" stroke-width=\"1.5\"/>\n";
        out << "<text x=\"" << left + plot_w - 144 << "\" y=\"" << legend_y + 4 << "\">" << label
            << "</text>\n";
        legend_y += 16;
    }
    out << "</svg>\n";
}

}  // namespace

CurveSet aggregate_curves(const std::vector<RunSeries>& series, int window) {
    if (window < 1) throw std::invalid_argument("smoothing window must be >= 1");
    CurveSet curves;
    std::map<std::string, std::map<int, std::vector<double>>> samples;
    for (const RunSeries& s : series)
        for (const auto& [iteration, acc] : smoothed_accuracy(s, window))
            samples[group_label(s)][iteration].push_back(acc);

    for (const auto& [label, by_iter] : samples) {
        std::vector<CurvePoint>& curve = curves[label];
        for (const auto& [iteration, accs] : by_iter) {
            CurvePoint p;
            p.iteration = iteration;
            p.n_seeds = static_cast<int>(accs.size());
            for (double a : accs) p.mean += a;
            p.mean /= accs.size();
            if (accs.size() > 1) {
                double ss = 0.0;
                for (double a : accs) ss += (a - p.mean) * (a - p.mean);
                p.stddev = std::sqrt(ss / (accs.size() - 1));
            }
            curve.push_back(p);
        }
    }
    return curves;
}

std::vector<std::filesystem::path> write_report(const ReportSpec& spec) {
    if (spec.inputs.empty()) throw std::invalid_argument("report needs at least one result file");
    for (double t : spec.targets)
        if (!(t > 0.0 && t <= 1.0))
            throw std::invalid_argument("report targets must lie in (0, 1]");
    if (spec.window < 1) throw std::invalid_argument("smoothing window must be >= 1");

    std::vector<RunSeries> series;
    for (const auto& path : spec.inputs) series.push_back(load_series(path));
    std::sort(series.begin(), series.end(), [](const RunSeries& a, const RunSeries& b) {
        const std::string ga = group_label(a), gb = group_label(b);
        return ga != gb ? ga < gb : a.seed < b.seed;
    });

    const nlohmann::json identity = dataset_identity(series.front());
    for (const RunSeries& s : series)
        if (dataset_identity(s) != identity)
            throw std::invalid_argument("refusing to aggregate results from different datasets");

    std::filesystem::create_directories(spec.out_dir);
    std::vector<std::filesystem::path> written;

    const CurveSet curves = aggregate_curves(series, spec.window);
    const std::filesystem::path curves_path = spec.out_dir / "curves.csv";
    {
        std::ofstream out(curves_path, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + curves_path.string());
        out << "group,iteration,mean_accuracy,std_accuracy,n_seeds\n";
        for (const auto& [label, curve] : curves)
            for (const CurvePoint& p : curve)
                out << label << "," << p.iteration << "," << format_num(p.mean) << ","
                    << format_num(p.stddev) << "," << p.n_seeds << "\n";
    }
    written.push_back(curves_path);

    const std::filesystem::path targets_path = spec.out_dir / "targets.csv";
    {
        std::ofstream out(targets_path, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + targets_path.string());
        out << "group,target,seed,iterations,samples,cost\n";
        std::map<std::string, std::vector<const RunSeries*>> groups;
        for (const RunSeries& s : series) groups[group_label(s)].push_back(&s);
        for (const auto& [label, members] : groups) {
            for (double target : spec.targets) {
                double sum_iter = 0, sum_samples = 0, sum_cost = 0;
                int reached = 0;
                for (const RunSeries* s : members) {
                    const auto iters = iterations_to_target(*s, target);
                    out << label << "," << format_num(target) << "," << s->seed << ",";
                    if (iters) {
                        const auto sc = samples_and_cost_to_target(*s, target);
                        out << *iters << "," << sc->samples << "," << format_num(sc->cost) << "\n";
                        sum_iter += *iters;
                        sum_samples += static_cast<double>(sc->samples);
                        sum_cost += sc->cost;
                        ++reached;
                    } else {
                        out << "not reached,not reached,not reached\n";
                    }
                }
                out << label << "," << format_num(target) << ",mean,";
                if (reached > 0) {
                    out << format_num(sum_iter / reached) << "," << format_num(sum_samples / reached)
                        << "," << format_num(sum_cost / reached) << "\n";
                } else {
                    out << "not reached,not reached,not reached\n";
                }
            }
        }
    }
    written.push_back(targets_path);

    if (spec.emit_svg) {
        const std::filesystem::path svg_path = spec.out_dir / "curves.svg";
        write_svg(curves, svg_path);
        written.push_back(svg_path);
    }
    return written;
}

}  // namespace conbatch
