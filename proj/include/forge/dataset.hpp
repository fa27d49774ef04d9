#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "forge/image.hpp"
#include "forge/record.hpp"

namespace forge {

enum class ReviewState { pending, accepted, rejected };

const char* to_string(ReviewState s);
ReviewState review_state_from_string(const std::string& s);

struct ReviewEntry {
    ReviewState state = ReviewState::pending;
    std::string note;
};

struct SceneAssets {
    RgbImage rgb;
    std::optional<DepthImage> depth;
    // Indexed like SceneRecord::objects; nullopt when no mask is stored.
    std::vector<std::optional<BinaryMask>> masks;
};

// On-disk layout:
//   scenes/<id>/{record.json, rgb.png, depth.png, masks/<i>.png}
//   dataset.jsonl   one summary per record, sorted by id
//   schemas.json    optional task schemas (built-ins otherwise)
//   review.jsonl    append-only review verdict log
//   inbox/<id>/     uploaded scenes that still await keypoints
//
// Reads go straight to the files (every write is an atomic rename);
// writes are serialized by one mutex per store.
class DatasetStore {
public:
    static DatasetStore create(const std::filesystem::path& root);
    static DatasetStore open(const std::filesystem::path& root);

    const std::filesystem::path& root() const { return root_; }
    std::filesystem::path scene_dir(const std::string& id) const { return root_ / "scenes" / id; }

    std::vector<std::string> record_ids() const;
    bool contains(const std::string& id) const;
    SceneRecord load_record(const std::string& id) const;
    std::vector<SceneRecord> load_all() const;

    RgbImage load_rgb(const SceneRecord& r) const;
    std::optional<DepthImage> load_depth(const SceneRecord& r) const;
    std::optional<BinaryMask> load_mask(const SceneRecord& r, std::size_t object_index) const;
    SceneAssets load_assets(const SceneRecord& r) const;

    // Writes images and record.json; fills in rgb/depth/mask refs. The index
    // is not touched; call rebuild_index() after a batch.
    void put_scene(SceneRecord record, const SceneAssets& assets);
    // Rewrites record.json only, e.g. after a keypoint edit.
    void put_record(const SceneRecord& record);
    void rebuild_index();

    TaskSchema schema_for(const std::string& task_id) const;
    std::vector<TaskSchema> schemas() const;
    void write_schemas(const std::vector<TaskSchema>& schemas);

    ReviewState review_state(const std::string& id) const;
    std::map<std::string, ReviewEntry> review_entries() const;
    void record_verdict(const std::string& id, ReviewState state, const std::string& note);

    std::filesystem::path inbox_dir(const std::string& id) const { return root_ / "inbox" / id; }
    std::vector<std::string> inbox_ids() const;
    bool in_inbox(const std::string& id) const;
    SceneRecord load_inbox_record(const std::string& id) const;
    void put_inbox_scene(SceneRecord record, const SceneAssets& assets);
    // Moves an inbox scene into scenes/ with the given keypoints. The caller
    // validates first.
    void promote_inbox(const SceneRecord& annotated);

    // Serializes callers that must read-modify-write under one lock.
    std::unique_lock<std::mutex> lock_writes() const { return std::unique_lock(*write_mutex_); }

private:
    explicit DatasetStore(std::filesystem::path root);
    // scenes/<id> for stored records, inbox/<id> for uploads awaiting keypoints.
    std::filesystem::path asset_dir(const std::string& id) const;
    void write_scene_files(const std::filesystem::path& dir, SceneRecord& record, const SceneAssets& assets) const;

    std::filesystem::path root_;
    std::unique_ptr<std::mutex> write_mutex_;
};

// Validation of one stored record: record invariants plus image/mask files.
ValidationReport validate_stored_record(const DatasetStore& store, const SceneRecord& r);

// Every record id mapped to its (possibly empty) report.
std::map<std::string, ValidationReport> validate_dataset(const DatasetStore& store);

}  // namespace forge
