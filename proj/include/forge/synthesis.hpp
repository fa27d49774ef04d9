#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "forge/dataset.hpp"
#include "forge/gateway.hpp"
#include "forge/geometry.hpp"
#include "forge/record.hpp"

namespace forge {

struct SynthesisConfig {
    std::size_t target_size = 500;
    TransformConfig transform;
    ContextKind context_kind = ContextKind::soft_edge;
    // false: every object in a scene reuses one sampled transform (about its own centroid).
    bool independent_per_object = true;
    int collision_margin = 2;
    int max_placement_retries = 20;
    std::uint64_t master_seed = 0;
    // Fraction of N that may be skipped before the run aborts.
    double failure_budget = 0.05;
    int workers = 1;
    double inpaint_strength = 1.0;
    double inpaint_guidance = 7.5;
    std::string id_prefix = "syn";

    void check() const;
};

struct SynthesizedScene {
    SceneRecord record;
    SceneAssets assets;
};

// Runs the per-object describe / segment / redescribe / transform / inpaint
// recurrence on one human record. `record_seed` fixes every random choice.
// Throws on service failure or when the result fails validation; placement
// exhaustion falls back to the identity transform instead.
SynthesizedScene synthesize_record(const SceneRecord& src, const SceneAssets& assets, const TaskSchema& schema,
                                   ModelService& services, const SynthesisConfig& cfg, std::uint64_t record_seed,
                                   const std::string& new_id);

// Recomputes every keypoint of `child` from its parent and the stored
// transforms; any inexact match is a violation.
ValidationReport verify_provenance(const SceneRecord& parent, const SceneRecord& child);

struct SynthesisSummary {
    std::size_t produced = 0;
    std::size_t skipped = 0;
    bool aborted = false;
    std::vector<std::string> skip_log;
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

// Grows D' to exactly cfg.target_size synthetic records in `out`, next to a
// verbatim copy of the human records they descend from. Output index k uses
// source and seeds derived from (master_seed, k, attempt) only, so the worker
// count never changes the bytes written. On abort the partial D' stays on disk
// and the summary reports aborted = true.
SynthesisSummary synthesize_dataset(const DatasetStore& in, DatasetStore& out, ModelService& services,
                                    const SynthesisConfig& cfg, const ProgressFn& progress = {});

// Review queue over synthetic records.
std::vector<std::string> pending_reviews(const DatasetStore& store);

enum class ExportFilter { accepted_only, all };

// Record ids passing the filter; human records are always included.
std::vector<std::string> export_ids(const DatasetStore& store, ExportFilter filter);

}  // namespace forge
