#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "conbatch/geo.hpp"
#include "conbatch/types.hpp"

namespace conbatch {

// A pool-based classification dataset: precomputed embedding vectors, class
// labels, and a georeference per sample. Immutable after construction and
// safe to share; sample identity is the zero-based row index.
struct Dataset {
    MatrixXfR embeddings;               // N x D
    std::vector<int> labels;            // values in [0, class_count)
    std::vector<GeoPoint> geoloc;       // N entries
    std::vector<int> area_ids;          // N entries, -1 where absent
    int class_count = 0;
    std::vector<std::string> class_names;
    std::vector<int64_t> external_ids;  // carried through I/O, never used as keys

    int n_samples() const { return static_cast<int>(embeddings.rows()); }
    int dim() const { return static_cast<int>(embeddings.cols()); }
    bool has_area_ids() const;
};

// Disjoint train/test/pool index lists over one Dataset.
struct SplitState {
    std::vector<int> train_idx;
    std::vector<int> test_idx;
    std::vector<int> pool_idx;
};

enum class Severity { warning, error };

struct Finding {
    Severity severity;
    std::string message;
};

// Full consistency check: shapes, label range, finite values, coordinate
// ranges, split disjointness, and known released-dataset split rows.
std::vector<Finding> validate_dataset(const Dataset& ds, const SplitState& splits);

// Reads a dataset directory (manifest.json, metadata.csv, embeddings.f32).
// Throws std::runtime_error listing every error-severity finding.
std::pair<Dataset, SplitState> load_dataset(const std::filesystem::path& dir);

// Same read path, but validation findings are returned instead of gating the
// load; only structurally unreadable files still throw.
std::pair<Dataset, SplitState> load_dataset_lenient(const std::filesystem::path& dir,
                                                    std::vector<Finding>& findings);

// Writes the same directory layout load_dataset reads. Round-trips exactly:
// reloading and rewriting reproduces byte-identical files.
void write_dataset(const Dataset& ds, const SplitState& splits, const std::filesystem::path& dir);

// Moves `batch` from pool to train (appended in batch order), returning the
// new split state. Throws if any index is not currently in the pool.
SplitState apply_acquisition(const SplitState& splits, const std::vector<int>& batch);

}  // namespace conbatch
