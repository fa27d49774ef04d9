#include "forge/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "forge/error.hpp"
#include "forge/json_io.hpp"
#include "forge/png_io.hpp"

namespace fs = std::filesystem;

namespace forge {

const char* to_string(ReviewState s) {
    switch (s) {
        case ReviewState::pending: return "pending";
        case ReviewState::accepted: return "accepted";
        case ReviewState::rejected: return "rejected";
    }
    return "pending";
}

ReviewState review_state_from_string(const std::string& s) {
    if (s == "pending") return ReviewState::pending;
    if (s == "accepted" || s == "accept") return ReviewState::accepted;
    if (s == "rejected" || s == "reject") return ReviewState::rejected;
    throw Error(ErrorKind::invalid_argument, fmt::format("unknown review verdict '{}'", s));
}

DatasetStore::DatasetStore(fs::path root) : root_(std::move(root)), write_mutex_(std::make_unique<std::mutex>()) {}

DatasetStore DatasetStore::create(const fs::path& root) {
    fs::create_directories(root / "scenes");
    DatasetStore store(root);
    if (!fs::exists(root / "dataset.jsonl")) store.rebuild_index();
    return store;
}

DatasetStore DatasetStore::open(const fs::path& root) {
    if (!fs::is_directory(root / "scenes"))
        throw Error(ErrorKind::not_found, fmt::format("{} is not a dataset (no scenes/ directory)", root.string()));
    return DatasetStore(root);
}

namespace {

std::vector<std::string> list_dirs(const fs::path& dir) {
    std::vector<std::string> ids;
    if (!fs::is_directory(dir)) return ids;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_directory() && fs::exists(e.path() / "record.json")) ids.push_back(e.path().filename().string());
    std::sort(ids.begin(), ids.end());
    return ids;
}

SceneRecord read_record(const fs::path& file) {
    const auto bytes = png::read_file(file);
    try {
        return record_from_json(json::parse(bytes.begin(), bytes.end()));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::io, fmt::format("{}: {}", file.string(), e.what()));
    }
}

bool valid_id(const std::string& id) {
    return !id.empty() && id != "." && id != ".." &&
           std::all_of(id.begin(), id.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.'; });
}

}  // namespace

std::vector<std::string> DatasetStore::record_ids() const { return list_dirs(root_ / "scenes"); }

bool DatasetStore::contains(const std::string& id) const {
    return valid_id(id) && fs::exists(scene_dir(id) / "record.json");
}

SceneRecord DatasetStore::load_record(const std::string& id) const {
    if (!contains(id)) throw Error(ErrorKind::not_found, fmt::format("no record '{}'", id));
    return read_record(scene_dir(id) / "record.json");
}

std::vector<SceneRecord> DatasetStore::load_all() const {
    std::vector<SceneRecord> out;
    for (const auto& id : record_ids()) out.push_back(load_record(id));
    return out;
}

RgbImage DatasetStore::load_rgb(const SceneRecord& r) const {
    return png::decode_rgb(png::read_file(asset_dir(r.record_id) / r.rgb_ref));
}

std::optional<DepthImage> DatasetStore::load_depth(const SceneRecord& r) const {
    if (!r.depth_ref) return std::nullopt;
    return png::decode_depth(png::read_file(asset_dir(r.record_id) / *r.depth_ref));
}

std::optional<BinaryMask> DatasetStore::load_mask(const SceneRecord& r, std::size_t object_index) const {
    if (object_index >= r.objects.size() || !r.objects[object_index].mask_ref) return std::nullopt;
    return png::decode_mask(png::read_file(asset_dir(r.record_id) / *r.objects[object_index].mask_ref));
}

SceneAssets DatasetStore::load_assets(const SceneRecord& r) const {
    SceneAssets a{load_rgb(r), load_depth(r), {}};
    for (std::size_t i = 0; i < r.objects.size(); ++i) a.masks.push_back(load_mask(r, i));
    return a;
}

void DatasetStore::write_scene_files(const fs::path& dir, SceneRecord& record, const SceneAssets& assets) const {
    if (!valid_id(record.record_id)) throw Error(ErrorKind::invalid_argument, fmt::format("invalid record id '{}'", record.record_id));
    if (assets.rgb.width != record.width || assets.rgb.height != record.height)
        throw Error(ErrorKind::dimension_mismatch, "image size does not match record width/height");
    png::write_file_atomic(dir / "rgb.png", png::encode_rgb(assets.rgb));
    record.rgb_ref = "rgb.png";
    if (assets.depth) {
        png::write_file_atomic(dir / "depth.png", png::encode_depth(*assets.depth));
        record.depth_ref = "depth.png";
    } else {
        record.depth_ref.reset();
    }
    for (std::size_t i = 0; i < record.objects.size(); ++i) {
        if (i < assets.masks.size() && assets.masks[i]) {
            const std::string ref = fmt::format("masks/{}.png", i);
            png::write_file_atomic(dir / ref, png::encode_mask(*assets.masks[i]));
            record.objects[i].mask_ref = ref;
        } else {
            record.objects[i].mask_ref.reset();
        }
    }
    png::write_file_atomic(dir / "record.json", dump_pretty(to_json(record)));
}

void DatasetStore::put_scene(SceneRecord record, const SceneAssets& assets) {
    auto lock = lock_writes();
    write_scene_files(scene_dir(record.record_id), record, assets);
}

void DatasetStore::put_record(const SceneRecord& record) {
    if (!contains(record.record_id)) throw Error(ErrorKind::not_found, fmt::format("no record '{}'", record.record_id));
    png::write_file_atomic(scene_dir(record.record_id) / "record.json", dump_pretty(to_json(record)));
}

void DatasetStore::rebuild_index() {
    std::string out;
    for (const auto& id : record_ids()) out += record_summary(load_record(id)).dump() + "\n";
    png::write_file_atomic(root_ / "dataset.jsonl", out);
}

std::vector<TaskSchema> DatasetStore::schemas() const {
    const auto file = root_ / "schemas.json";
    if (!fs::exists(file)) return builtin_schemas();
    const auto bytes = png::read_file(file);
    std::vector<TaskSchema> out;
    try {
        const json doc = json::parse(bytes.begin(), bytes.end());
        for (const auto& s : doc.at("schemas")) out.push_back(schema_from_json(s));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::io, fmt::format("{}: {}", file.string(), e.what()));
    }
    return out;
}

TaskSchema DatasetStore::schema_for(const std::string& task_id) const {
    for (const auto& s : schemas())
        if (s.task_id == task_id) return s;
    if (auto s = find_builtin_schema(task_id)) return *s;
    throw Error(ErrorKind::not_found, fmt::format("unknown task '{}'", task_id));
}

void DatasetStore::write_schemas(const std::vector<TaskSchema>& schemas) {
    json a = json::array();
    for (const auto& s : schemas) a.push_back(to_json(s));
    auto lock = lock_writes();
    png::write_file_atomic(root_ / "schemas.json", dump_pretty(json{{"schemas", a}}));
}

std::map<std::string, ReviewEntry> DatasetStore::review_entries() const {
    std::map<std::string, ReviewEntry> out;
    std::ifstream in(root_ / "review.jsonl");
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            const auto j = json::parse(line);
            out[j.at("record_id").get<std::string>()] = {review_state_from_string(j.at("verdict").get<std::string>()),
                                                         j.value("note", std::string{})};
        } catch (const json::exception&) {
            // A torn final line from a crash is ignored; earlier verdicts stand.
        }
    }
    return out;
}

ReviewState DatasetStore::review_state(const std::string& id) const {
    const auto entries = review_entries();
    auto it = entries.find(id);
    return it == entries.end() ? ReviewState::pending : it->second.state;
}

void DatasetStore::record_verdict(const std::string& id, ReviewState state, const std::string& note) {
    if (!contains(id)) throw Error(ErrorKind::not_found, fmt::format("no record '{}'", id));
    auto lock = lock_writes();
    std::ofstream out(root_ / "review.jsonl", std::ios::app | std::ios::binary);
    if (!out) throw Error(ErrorKind::io, "cannot append to review.jsonl");
    out << json{{"record_id", id}, {"verdict", to_string(state)}, {"note", note}}.dump() << '\n';
    out.flush();
    if (!out) throw Error(ErrorKind::io, "failed writing review.jsonl");
}

std::vector<std::string> DatasetStore::inbox_ids() const { return list_dirs(root_ / "inbox"); }

bool DatasetStore::in_inbox(const std::string& id) const {
    return valid_id(id) && fs::exists(inbox_dir(id) / "record.json");
}

fs::path DatasetStore::asset_dir(const std::string& id) const {
    return !contains(id) && in_inbox(id) ? inbox_dir(id) : scene_dir(id);
}

SceneRecord DatasetStore::load_inbox_record(const std::string& id) const {
    if (!valid_id(id) || !fs::exists(root_ / "inbox" / id / "record.json"))
        throw Error(ErrorKind::not_found, fmt::format("no inbox scene '{}'", id));
    return read_record(root_ / "inbox" / id / "record.json");
}

void DatasetStore::put_inbox_scene(SceneRecord record, const SceneAssets& assets) {
    auto lock = lock_writes();
    if (fs::exists(scene_dir(record.record_id)) || fs::exists(root_ / "inbox" / record.record_id))
        throw Error(ErrorKind::conflict, fmt::format("record '{}' already exists", record.record_id));
    write_scene_files(root_ / "inbox" / record.record_id, record, assets);
}

void DatasetStore::promote_inbox(const SceneRecord& annotated) {
    const auto from = root_ / "inbox" / annotated.record_id;
    const auto to = scene_dir(annotated.record_id);
    if (fs::exists(to)) throw Error(ErrorKind::conflict, fmt::format("record '{}' already exists", annotated.record_id));
    png::write_file_atomic(from / "record.json", dump_pretty(to_json(annotated)));
    fs::create_directories(to.parent_path());
    fs::rename(from, to);
}

ValidationReport validate_stored_record(const DatasetStore& store, const SceneRecord& r) {
    ValidationReport report;
    try {
        report = validate_record(r, store.schema_for(r.task_id), [&store](const std::string& id) {
            return store.contains(id) && !store.load_record(id).is_synthetic();
        });
    } catch (const Error& e) {
        report.push_back({"schema", e.what()});
        return report;
    }
    try {
        const auto rgb = store.load_rgb(r);
        if (rgb.width != r.width || rgb.height != r.height)
            report.push_back({"record", fmt::format("rgb image is {}x{}, record says {}x{}", rgb.width, rgb.height, r.width, r.height)});
        if (auto depth = store.load_depth(r); depth && (depth->width != r.width || depth->height != r.height))
            report.push_back({"record", "depth image size differs from the record"});
        for (std::size_t i = 0; i < r.objects.size(); ++i)
            if (auto m = store.load_mask(r, i); m && (m->width() != r.width || m->height() != r.height))
                report.push_back({"record", fmt::format("mask {} size differs from the record", i)});
    } catch (const Error& e) {
        report.push_back({"record", fmt::format("unreadable asset: {}", e.what())});
    }
    return report;
}

std::map<std::string, ValidationReport> validate_dataset(const DatasetStore& store) {
    std::map<std::string, ValidationReport> out;
    for (const auto& id : store.record_ids()) {
        try {
            out[id] = validate_stored_record(store, store.load_record(id));
        } catch (const Error& e) {
            out[id] = {{"record", e.what()}};
        }
    }
    return out;
}

}  // namespace forge
