#include "forge/synthesis.hpp"

#include <atomic>
#include <mutex>
#include <optional>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "forge/context.hpp"
#include "forge/error.hpp"
#include "forge/random.hpp"

namespace fs = std::filesystem;

namespace forge {

void SynthesisConfig::check() const {
    transform.check();
    if (collision_margin < 0) throw Error(ErrorKind::invalid_argument, "collision margin must be >= 0");
    if (max_placement_retries < 1) throw Error(ErrorKind::invalid_argument, "max placement retries must be >= 1");
    if (!(failure_budget >= 0.0)) throw Error(ErrorKind::invalid_argument, "failure budget must be >= 0");
    if (workers < 1) throw Error(ErrorKind::invalid_argument, "workers must be >= 1");
    if (id_prefix.empty()) throw Error(ErrorKind::invalid_argument, "empty id prefix");
}

namespace {

// Seed-stream tags keep the per-purpose sub-seeds independent.
enum : std::uint64_t { kPromptStream = 1, kTransformStream = 2, kInpaintStream = 3, kSourceStream = 4, kRecordStream = 5 };

std::vector<BinaryMask> others_of(const std::vector<BinaryMask>& footprints, std::size_t i) {
    std::vector<BinaryMask> out;
    for (std::size_t j = 0; j < footprints.size(); ++j)
        if (j != i && !footprints[j].empty()) out.push_back(footprints[j]);
    return out;
}

}  // namespace

SynthesizedScene synthesize_record(const SceneRecord& src, const SceneAssets& assets, const TaskSchema& schema,
                                   ModelService& services, const SynthesisConfig& cfg, std::uint64_t record_seed,
                                   const std::string& new_id) {
    if (src.is_synthetic()) throw Error(ErrorKind::invalid_argument, "synthesis sources must be human records");
    const int w = src.width, h = src.height;
    const std::size_t count = src.objects.size();
    const RgbImage& s = assets.rgb;

    // Descriptors: annotation first, the description model only for gaps.
    std::vector<std::string> descriptors(count);
    std::optional<std::vector<std::string>> described;
    for (std::size_t i = 0; i < count; ++i) {
        descriptors[i] = src.objects[i].descriptor;
        if (!descriptors[i].empty()) continue;
        if (!described) described = services.describe_objects(s, src.instruction);
        if (i >= described->size())
            throw Error(ErrorKind::service_protocol, fmt::format("description model returned no descriptor for object {}", i));
        descriptors[i] = (*described)[i];
    }

    std::vector<BinaryMask> masks(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (i < assets.masks.size() && assets.masks[i] && !assets.masks[i]->empty()) masks[i] = *assets.masks[i];
        else masks[i] = services.segment(s, descriptors[i]);
    }

    // Context once per scene, from the original image.
    std::optional<ContextImage> scene_context;
    ContextKind kind = cfg.context_kind;
    if (kind == ContextKind::depth && (!assets.depth || assets.depth->width == 0)) {
        spdlog::warn("{}: no depth image, falling back to soft_edge context", src.record_id);
        kind = ContextKind::soft_edge;
    }
    if (kind == ContextKind::soft_edge) scene_context = compute_soft_edge(s);

    SyntheticProvenance prov;
    prov.parent_id = src.record_id;
    prov.record_seed = record_seed;
    prov.inpaint_seed = derive_seed({record_seed, kInpaintStream});
    prov.context_kind = kind;

    std::vector<BinaryMask> footprints = masks;
    RgbImage running = s;
    KeypointSet moved;
    std::vector<ObjectEntry> objects(count);

    for (std::size_t i = 0; i < count; ++i) {
        const auto oi = static_cast<std::uint64_t>(i);
        const std::string prompt = services.resample_description(descriptors[i], derive_seed({record_seed, kPromptStream, oi}));

        std::vector<PixelPoint> bound;
        for (const auto& [role, kp] : src.keypoints)
            if (kp.object_index == static_cast<int>(i)) bound.push_back(kp.point);

        const PixelPoint pivot = masks[i].centroid();
        const auto others = others_of(footprints, i);
        TransformSpec spec = TransformSpec::identity();
        std::uint64_t spec_seed = 0;
        int attempts = 0;
        bool fallback = true;
        for (int k = 0; k < cfg.max_placement_retries; ++k) {
            ++attempts;
            const std::uint64_t object_key = cfg.independent_per_object ? oi : 0;
            spec_seed = derive_seed({record_seed, kTransformStream, object_key, static_cast<std::uint64_t>(k)});
            TransformSpec candidate = sample_transform(cfg.transform, spec_seed, w, h, pivot);
            if (!check_placement(candidate, masks[i], others, cfg.collision_margin)) continue;
            bool keypoints_ok = true;
            for (auto p : bound) keypoints_ok &= in_bounds(apply_to_point(candidate, p), w, h);
            if (!keypoints_ok) continue;
            spec = std::move(candidate);
            fallback = false;
            break;
        }
        if (fallback) {
            spdlog::debug("{} object {}: placement retries exhausted, using identity", new_id, i);
            spec_seed = 0;
        }

        ContextImage object_context;
        switch (kind) {
            case ContextKind::soft_edge: object_context = masked_context(*scene_context, masks[i]); break;
            case ContextKind::depth: object_context = compute_depth_context(*assets.depth, masks[i]); break;
            case ContextKind::seg_mask: object_context = compute_mask_context(masks[i]); break;
        }

        InpaintRequest req;
        req.region = compose_inpaint_region(masks[i], spec);
        req.context = apply_to_context(spec, object_context, masks[i]);
        req.image = std::move(running);
        req.prompt = prompt;
        req.seed = derive_seed({prov.inpaint_seed, oi});
        req.strength = cfg.inpaint_strength;
        req.guidance = cfg.inpaint_guidance;
        running = services.inpaint(req);

        for (const auto& [role, kp] : src.keypoints)
            if (kp.object_index == static_cast<int>(i))
                moved.add(role, {apply_to_point_in_frame(spec, kp.point, w, h), kp.object_index});

        footprints[i] = apply_to_mask(spec, masks[i]);
        objects[i] = {prompt, std::nullopt};
        prov.objects.push_back({static_cast<int>(i), descriptors[i], prompt, spec, spec_seed, attempts, fallback});
    }

    // Keypoints bound to a nonexistent object are carried over so validation
    // reports them instead of silently dropping them.
    for (const auto& [role, kp] : src.keypoints)
        if (!moved.contains(role)) moved.add(role, kp);

    SynthesizedScene out;
    out.record.record_id = new_id;
    out.record.task_id = src.task_id;
    out.record.object_set = src.object_set;
    out.record.width = w;
    out.record.height = h;
    out.record.instruction = src.instruction;
    out.record.objects = std::move(objects);
    out.record.keypoints = std::move(moved);
    out.record.provenance = std::move(prov);
    out.assets.rgb = std::move(running);
    out.assets.depth = assets.depth;
    for (auto& f : footprints) out.assets.masks.emplace_back(std::move(f));

    auto report = validate_record(out.record, schema, [&src](const std::string& id) { return id == src.record_id; });
    auto recompute = verify_provenance(src, out.record);
    report.insert(report.end(), recompute.begin(), recompute.end());
    if (!report.empty())
        throw Error(ErrorKind::schema_mismatch,
                    fmt::format("synthetic record {} failed validation: {}", new_id, report.front().message));
    return out;
}

ValidationReport verify_provenance(const SceneRecord& parent, const SceneRecord& child) {
    ValidationReport out;
    const auto* syn = child.synthetic();
    if (!syn) return {{"provenance", "record is not synthetic"}};
    if (syn->parent_id != parent.record_id)
        out.push_back({"provenance", fmt::format("parent is '{}', not '{}'", syn->parent_id, parent.record_id)});
    if (parent.keypoints.roles() != child.keypoints.roles())
        out.push_back({"provenance", "child and parent carry different keypoint roles"});
    for (const auto& [role, kp] : parent.keypoints) {
        if (!child.keypoints.contains(role)) continue;
        const TransformSpec* spec = nullptr;
        for (const auto& o : syn->objects)
            if (o.object_index == kp.object_index) spec = &o.transform;
        if (!spec) {
            out.push_back({"provenance", fmt::format("no transform recorded for object {}", kp.object_index)});
            continue;
        }
        const PixelPoint expect = apply_to_point(*spec, kp.point);
        const auto& got = child.keypoints.at(role);
        if (!(got.point == expect) || got.object_index != kp.object_index)
            out.push_back({"provenance", fmt::format("role '{}' at ({}, {}) but transform gives ({}, {})", to_string(role),
                                                     got.point.x, got.point.y, expect.x, expect.y)});
    }
    return out;
}

SynthesisSummary synthesize_dataset(const DatasetStore& in, DatasetStore& out, ModelService& services,
                                    const SynthesisConfig& cfg, const ProgressFn& progress) {
    cfg.check();
    SynthesisSummary summary;
    const std::size_t n = cfg.target_size;
    if (n == 0) {
        out.rebuild_index();
        return summary;
    }

    std::vector<SceneRecord> sources;
    for (auto& r : in.load_all())
        if (!r.is_synthetic()) sources.push_back(std::move(r));
    if (sources.empty()) throw Error(ErrorKind::empty_set, "source dataset has no human records");
    for (const auto& r : sources) {
        if (auto report = validate_stored_record(in, r); !report.empty())
            throw Error(ErrorKind::schema_mismatch, fmt::format("source record {} is invalid: {}", r.record_id, report.front().message));
    }

    // Human records travel with D' so the output validates on its own.
    for (const auto& r : sources) {
        const auto dst = out.scene_dir(r.record_id);
        fs::remove_all(dst);
        fs::create_directories(dst.parent_path());
        fs::copy(in.scene_dir(r.record_id), dst, fs::copy_options::recursive);
    }

    std::vector<TaskSchema> schemas;
    for (const auto& r : sources) schemas.push_back(in.schema_for(r.task_id));
    if (fs::exists(in.root() / "schemas.json")) out.write_schemas(in.schemas());

    const auto budget = static_cast<std::size_t>(cfg.failure_budget * static_cast<double>(n));
    std::atomic<std::size_t> next{0}, produced{0}, skipped{0};
    std::atomic<bool> abort{false};
    std::mutex log_mutex;

    auto worker = [&] {
        for (std::size_t k = next++; k < n && !abort; k = next++) {
            const std::string id = fmt::format("{}-{:06d}", cfg.id_prefix, k);
            for (std::uint64_t attempt = 0; !abort; ++attempt) {
                Rng pick(derive_seed({cfg.master_seed, static_cast<std::uint64_t>(k), attempt, kSourceStream}));
                const std::size_t si = pick.below(sources.size());
                const SceneRecord& src = sources[si];
                try {
                    const SceneAssets assets = in.load_assets(src);
                    const std::uint64_t record_seed =
                        derive_seed({cfg.master_seed, static_cast<std::uint64_t>(k), attempt, kRecordStream});
                    auto scene = synthesize_record(src, assets, schemas[si], services, cfg, record_seed, id);
                    out.put_scene(std::move(scene.record), scene.assets);
                    const std::size_t done = ++produced;
                    if (progress) progress(done, n);
                    break;
                } catch (const Error& e) {
                    const std::string line = fmt::format("{} (source {}, attempt {}): skipped: {}", id, src.record_id, attempt, e.what());
                    spdlog::warn("{}", line);
                    {
                        std::lock_guard lock(log_mutex);
                        summary.skip_log.push_back(line);
                    }
                    if (++skipped > budget) {
                        abort = true;
                        spdlog::error("failure budget of {} skipped records exceeded; aborting", budget);
                    }
                }
            }
        }
    };

    const int workers = std::max(1, std::min<int>(cfg.workers, static_cast<int>(n)));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    }

    summary.produced = produced;
    summary.skipped = skipped;
    summary.aborted = abort;
    std::sort(summary.skip_log.begin(), summary.skip_log.end());
    out.rebuild_index();
    return summary;
}

std::vector<std::string> pending_reviews(const DatasetStore& store) {
    const auto entries = store.review_entries();
    std::vector<std::string> out;
    for (const auto& id : store.record_ids()) {
        auto it = entries.find(id);
        if (it != entries.end() && it->second.state != ReviewState::pending) continue;
        if (store.load_record(id).is_synthetic()) out.push_back(id);
    }
    return out;
}

std::vector<std::string> export_ids(const DatasetStore& store, ExportFilter filter) {
    const auto entries = store.review_entries();
    std::vector<std::string> out;
    for (const auto& id : store.record_ids()) {
        if (filter == ExportFilter::accepted_only && store.load_record(id).is_synthetic()) {
            auto it = entries.find(id);
            if (it == entries.end() || it->second.state != ReviewState::accepted) continue;
        }
        out.push_back(id);
    }
    return out;
}

}  // namespace forge
