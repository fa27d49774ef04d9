#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "forge/affordance.hpp"
#include "forge/dataset.hpp"
#include "forge/json_io.hpp"

namespace forge {

enum class HeadKind { natural_language, regression };

const char* to_string(HeadKind k);
HeadKind head_kind_from_string(const std::string& s);

struct AugmentationConfig {
    bool rotate = false;
    double rotation_max = 0.2617993877991494;  // 15 degrees
    bool resized_crop = false;
    double crop_scale_min = 0.8;  // crop side as a fraction of the image side
    bool hflip = false;
    bool vflip = false;
    double flip_probability = 0.5;
    bool color_jitter = false;
    double brightness = 0.2;
    double contrast = 0.2;
    double saturation = 0.2;
    int replicas = 1;

    bool any() const { return rotate || resized_crop || hflip || vflip || color_jitter; }
    void check() const;
};

struct FineTuneRecord {
    std::string id;         // source id, plus "#r<k>" for augmented replicas
    std::string source_id;
    std::string task_id;
    std::string image;      // path of the (possibly augmented) image
    int width = 0;
    int height = 0;
    std::string prompt;
    HeadKind head = HeadKind::natural_language;
    std::string response;              // natural-language head
    std::vector<int> targets;          // regression head: 2 per role, canonical role order
    std::vector<bool> mask;            // per target entry
    KeypointSet keypoints;             // pixel keypoints after augmentation
};

struct BuildResult {
    std::vector<FineTuneRecord> records;
    std::vector<std::string> dropped;  // replica id + reason
};

// One record per (record x replica). Without augmentation there is a single
// replica that points at the stored image; augmented replicas are written to
// `image_dir`. Deterministic in (seed, record id, replica index).
BuildResult build_records(const DatasetStore& store, const std::vector<std::string>& ids, HeadKind head,
                          const AugmentationConfig& aug, std::uint64_t seed, const std::filesystem::path& image_dir,
                          const PromptTemplate& prompt = PromptTemplate::default_template());

json to_json(const FineTuneRecord& r);
void write_jsonl(const std::filesystem::path& path, const std::vector<FineTuneRecord>& records);

// Horizontal / vertical flips map x to W - 1 - x (resp. y to H - 1 - y).
RgbImage flip_horizontal(const RgbImage& img);
RgbImage flip_vertical(const RgbImage& img);

struct HoldoutSpec {
    std::set<std::string> object_sets;
    std::set<std::string> record_ids;

    bool empty() const { return object_sets.empty() && record_ids.empty(); }
};

struct SplitResult {
    std::vector<std::string> train;
    std::vector<std::string> test;
    // Synthetic descendants of held-out records: in neither side.
    std::vector<std::string> excluded;
};

// Held-out records go to test; their synthetic children are excluded from
// both sides. An empty rule is allowed and yields an empty test side; a
// non-empty rule that selects nothing, or an empty train side, is an error.
SplitResult split(const std::vector<SceneRecord>& records, const HoldoutSpec& holdout);

json split_manifest(const SplitResult& s, const HoldoutSpec& holdout);

}  // namespace forge
