#include "conbatch/data.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

static_assert(std::endian::native == std::endian::little,
              "embedding blobs are little-endian; big-endian hosts are unsupported");

namespace conbatch {

using nlohmann::json;

namespace {

struct ReleasedRow {
    int n_samples;
    int class_count;
    int train, test, pool;
    const char* name;
};

// Split rows of the published datasets, keyed by (sample count, classes).
constexpr ReleasedRow kReleasedRows[] = {
    {5999, 2, 30, 1500, 4469, "build6k"},
    {17500, 7, 70, 3500, 13930, "nieman17k"},
    {5999, 10, 30, 1500, 4469, "mnist6k"},
};

std::string read_text_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("missing file: " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (const char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void check(std::vector<Finding>& out, bool ok, const std::string& message,
           Severity sev = Severity::error) {
    if (!ok) out.push_back({sev, message});
}

}  // namespace

bool Dataset::has_area_ids() const {
    if (area_ids.empty()) return false;
    return std::all_of(area_ids.begin(), area_ids.end(), [](int a) { return a >= 0; });
}

std::vector<Finding> validate_dataset(const Dataset& ds, const SplitState& splits) {
    std::vector<Finding> out;
    const int n = ds.n_samples();

    check(out, ds.class_count >= 2, "class_count must be at least 2");
    check(out, static_cast<int>(ds.labels.size()) == n,
          "label count " + std::to_string(ds.labels.size()) + " != sample count " + std::to_string(n));
    check(out, static_cast<int>(ds.geoloc.size()) == n,
          "geolocation count " + std::to_string(ds.geoloc.size()) + " != sample count " + std::to_string(n));
    check(out, static_cast<int>(ds.class_names.size()) == ds.class_count,
          "class_names size != class_count");

    for (size_t i = 0; i < ds.labels.size(); ++i) {
        if (ds.labels[i] < 0 || ds.labels[i] >= ds.class_count) {
            out.push_back({Severity::error, "label " + std::to_string(ds.labels[i]) + " at row " +
                                                std::to_string(i) + " outside [0, " +
                                                std::to_string(ds.class_count) + ")"});
            break;
        }
    }
    for (size_t i = 0; i < ds.geoloc.size(); ++i) {
        const auto& g = ds.geoloc[i];
        if (!std::isfinite(g.lat) || !std::isfinite(g.lon)) {
            out.push_back({Severity::error, "non-finite coordinate at row " + std::to_string(i)});
            break;
        }
        if (g.lat < -90.0 || g.lat > 90.0 || g.lon < -180.0 || g.lon > 180.0) {
            out.push_back({Severity::error, "coordinate out of range at row " + std::to_string(i) +
                                                ": (" + format_double(g.lat) + ", " +
                                                format_double(g.lon) + ")"});
            break;
        }
    }
    if (!ds.embeddings.allFinite())
        out.push_back({Severity::error, "embeddings contain NaN or Inf"});

    if (!ds.external_ids.empty()) {
        std::unordered_set<int64_t> seen;
        for (const int64_t id : ds.external_ids) {
            if (!seen.insert(id).second) {
                out.push_back({Severity::error, "duplicate id " + std::to_string(id)});
                break;
            }
        }
    }

    // Split sanity: in range, pairwise disjoint.
    std::vector<int8_t> owner(static_cast<size_t>(std::max(n, 0)), -1);
    const std::vector<int>* lists[3] = {&splits.train_idx, &splits.test_idx, &splits.pool_idx};
    const char* names[3] = {"train", "test", "pool"};
    for (int s = 0; s < 3; ++s) {
        for (const int idx : *lists[s]) {
            if (idx < 0 || idx >= n) {
                out.push_back({Severity::error, std::string(names[s]) + " index " +
                                                    std::to_string(idx) + " out of range"});
                continue;
            }
            if (owner[idx] >= 0) {
                out.push_back({Severity::error,
                               "sample " + std::to_string(idx) + " appears in both " +
                                   names[owner[idx]] + " and " + names[s] + " splits"});
            }
            owner[idx] = static_cast<int8_t>(s);
        }
    }

    for (const auto& row : kReleasedRows) {
        if (n == row.n_samples && ds.class_count == row.class_count) {
            const bool match = static_cast<int>(splits.train_idx.size()) == row.train &&
                               static_cast<int>(splits.test_idx.size()) == row.test &&
                               static_cast<int>(splits.pool_idx.size()) == row.pool;
            check(out, match,
                  std::string("split sizes differ from the released ") + row.name + " row (" +
                      std::to_string(row.train) + "/" + std::to_string(row.test) + "/" +
                      std::to_string(row.pool) + ")",
                  Severity::warning);
        }
    }
    return out;
}

std::pair<Dataset, SplitState> load_dataset_lenient(const std::filesystem::path& dir,
                                                    std::vector<Finding>& findings) {
    const auto manifest_path = dir / "manifest.json";
    const auto metadata_path = dir / "metadata.csv";
    const auto blob_path = dir / "embeddings.f32";

    json manifest;
    try {
        manifest = json::parse(read_text_file(manifest_path));
    } catch (const json::parse_error& e) {
        throw std::runtime_error("manifest.json: " + std::string(e.what()));
    }

    Dataset ds;
    const int n = manifest.at("n_samples").get<int>();
    const int dim = manifest.at("dim").get<int>();
    ds.class_count = manifest.at("class_count").get<int>();
    ds.class_names = manifest.at("class_names").get<std::vector<std::string>>();
    if (n <= 0 || dim <= 0)
        throw std::runtime_error("manifest.json: n_samples and dim must be positive");

    // metadata.csv drives the row order; everything else must agree with it.
    std::istringstream meta(read_text_file(metadata_path));
    std::string line;
    if (!std::getline(meta, line))
        throw std::runtime_error("metadata.csv: empty file");
    {
        auto header = split_csv_line(line);
        const std::vector<std::string> want = {"id", "lat", "lon", "label", "split", "area_id"};
        if (header != std::vector<std::string>(want))
            throw std::runtime_error("metadata.csv: header must be id,lat,lon,label,split,area_id");
    }

    SplitState splits;
    ds.labels.reserve(n);
    ds.geoloc.reserve(n);
    ds.area_ids.reserve(n);
    ds.external_ids.reserve(n);
    int row = 0;
    while (std::getline(meta, line)) {
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv_line(line);
        if (f.size() != 6)
            throw std::runtime_error("metadata.csv row " + std::to_string(row) +
                                     ": expected 6 fields, got " + std::to_string(f.size()));
        try {
            ds.external_ids.push_back(std::stoll(f[0]));
            ds.geoloc.push_back({std::stod(f[1]), std::stod(f[2])});
            ds.labels.push_back(std::stoi(f[3]));
        } catch (const std::exception&) {
            throw std::runtime_error("metadata.csv row " + std::to_string(row) +
                                     ": malformed numeric field");
        }
        if (f[4] == "train")
            splits.train_idx.push_back(row);
        else if (f[4] == "test")
            splits.test_idx.push_back(row);
        else if (f[4] == "pool")
            splits.pool_idx.push_back(row);
        else
            throw std::runtime_error("metadata.csv row " + std::to_string(row) +
                                     ": unknown split '" + f[4] + "'");
        if (f[5].empty()) {
            ds.area_ids.push_back(-1);
        } else {
            const int area = std::stoi(f[5]);
            if (area < 0)
                throw std::runtime_error("metadata.csv row " + std::to_string(row) +
                                         ": negative area_id");
            ds.area_ids.push_back(area);
        }
        ++row;
    }
    if (row != n)
        throw std::runtime_error("metadata.csv has " + std::to_string(row) +
                                 " rows but manifest says n_samples=" + std::to_string(n));

    std::ifstream blob(blob_path, std::ios::binary | std::ios::ate);
    if (!blob) throw std::runtime_error("missing file: " + blob_path.string());
    const auto bytes = static_cast<int64_t>(blob.tellg());
    const int64_t expected = static_cast<int64_t>(n) * dim * 4;
    if (bytes != expected)
        throw std::runtime_error("embeddings.f32 is " + std::to_string(bytes) +
                                 " bytes; manifest dimensions require " + std::to_string(expected));
    ds.embeddings.resize(n, dim);
    blob.seekg(0);
    blob.read(reinterpret_cast<char*>(ds.embeddings.data()), expected);
    if (!blob) throw std::runtime_error("embeddings.f32: short read");

    findings = validate_dataset(ds, splits);
    return {std::move(ds), std::move(splits)};
}

std::pair<Dataset, SplitState> load_dataset(const std::filesystem::path& dir) {
    std::vector<Finding> findings;
    auto data = load_dataset_lenient(dir, findings);
    std::string errors;
    for (const auto& f : findings)
        if (f.severity == Severity::error) errors += (errors.empty() ? "" : "; ") + f.message;
    if (!errors.empty()) throw std::runtime_error("dataset " + dir.string() + ": " + errors);
    return data;
}

void write_dataset(const Dataset& ds, const SplitState& splits, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const int n = ds.n_samples();

    json manifest;
    manifest["n_samples"] = n;
    manifest["dim"] = ds.dim();
    manifest["class_count"] = ds.class_count;
    manifest["class_names"] = ds.class_names;
    {
        std::ofstream out(dir / "manifest.json", std::ios::binary);
        out << manifest.dump(2) << "\n";
    }

    std::vector<const char*> split_of(n, "pool");
    for (const int i : splits.train_idx) split_of[i] = "train";
    for (const int i : splits.test_idx) split_of[i] = "test";
    {
        std::ofstream out(dir / "metadata.csv", std::ios::binary);
        out << "id,lat,lon,label,split,area_id\n";
        for (int i = 0; i < n; ++i) {
            const int64_t id = ds.external_ids.empty() ? i : ds.external_ids[i];
            out << id << ',' << format_double(ds.geoloc[i].lat) << ','
                << format_double(ds.geoloc[i].lon) << ',' << ds.labels[i] << ',' << split_of[i]
                << ',';
            if (i < static_cast<int>(ds.area_ids.size()) && ds.area_ids[i] >= 0)
                out << ds.area_ids[i];
            out << '\n';
        }
    }
    {
        std::ofstream out(dir / "embeddings.f32", std::ios::binary);
        out.write(reinterpret_cast<const char*>(ds.embeddings.data()),
                  static_cast<std::streamsize>(ds.embeddings.size()) * 4);
    }
}

SplitState apply_acquisition(const SplitState& splits, const std::vector<int>& batch) {
    SplitState next = splits;
    std::unordered_set<int> in_pool(next.pool_idx.begin(), next.pool_idx.end());
    for (const int idx : batch) {
        if (!in_pool.erase(idx))
            throw std::runtime_error("acquired index " + std::to_string(idx) +
                                     " is not in the pool");
    }
    if (!batch.empty()) {
        std::erase_if(next.pool_idx, [&](int idx) { return !in_pool.count(idx); });
        next.train_idx.insert(next.train_idx.end(), batch.begin(), batch.end());
    }
    return next;
}

}  // namespace conbatch
