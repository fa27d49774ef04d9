#include "forge/vlm_dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "forge/error.hpp"
#include "forge/geometry.hpp"
#include "forge/png_io.hpp"
#include "forge/random.hpp"

namespace fs = std::filesystem;

namespace forge {

const char* to_string(HeadKind k) { return k == HeadKind::regression ? "regression" : "nl"; }

HeadKind head_kind_from_string(const std::string& s) {
    if (s == "nl" || s == "natural_language") return HeadKind::natural_language;
    if (s == "regression") return HeadKind::regression;
    throw Error(ErrorKind::invalid_argument, fmt::format("unknown head kind '{}' (nl or regression)", s));
}

void AugmentationConfig::check() const {
    if (replicas < 1) throw Error(ErrorKind::invalid_argument, "replicas must be >= 1");
    if (!(rotation_max >= 0.0)) throw Error(ErrorKind::invalid_argument, "rotation_max must be >= 0");
    if (!(crop_scale_min > 0.0 && crop_scale_min <= 1.0))
        throw Error(ErrorKind::invalid_argument, "crop_scale_min must be in (0, 1]");
    if (!(flip_probability >= 0.0 && flip_probability <= 1.0))
        throw Error(ErrorKind::invalid_argument, "flip_probability must be in [0, 1]");
    if (!(brightness >= 0.0 && contrast >= 0.0 && saturation >= 0.0))
        throw Error(ErrorKind::invalid_argument, "color jitter ranges must be >= 0");
}

RgbImage flip_horizontal(const RgbImage& img) {
    RgbImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c) out.at(img.width - 1 - x, y, c) = img.at(x, y, c);
    return out;
}

RgbImage flip_vertical(const RgbImage& img) {
    RgbImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c) out.at(x, img.height - 1 - y, c) = img.at(x, y, c);
    return out;
}

namespace {

std::uint8_t sample_channel(const RgbImage& img, double u, double v, int c) {
    const int x0 = static_cast<int>(std::floor(u)), y0 = static_cast<int>(std::floor(v));
    const double fx = u - x0, fy = v - y0;
    auto at = [&](int x, int y) -> double {
        return (x < 0 || y < 0 || x >= img.width || y >= img.height) ? 0.0 : img.at(x, y, c);
    };
    const double val = (1 - fy) * ((1 - fx) * at(x0, y0) + fx * at(x0 + 1, y0)) + fy * ((1 - fx) * at(x0, y0 + 1) + fx * at(x0 + 1, y0 + 1));
    return static_cast<std::uint8_t>(std::clamp(std::lround(val), 0L, 255L));
}

RgbImage warp(const RgbImage& img, const TransformSpec& t) {
    RgbImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const PixelPoint src = inverse_map(t, {x + 0.5, y + 0.5});
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = sample_channel(img, src.x - 0.5, src.y - 0.5, c);
        }
    return out;
}

RgbImage crop_resize(const RgbImage& img, double ox, double oy, double cw, double ch) {
    RgbImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const double sx = ox + (x + 0.5) * cw / img.width, sy = oy + (y + 0.5) * ch / img.height;
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = sample_channel(img, sx - 0.5, sy - 0.5, c);
        }
    return out;
}

void jitter_colors(RgbImage& img, double b, double c, double s) {
    double mean = 0.0;
    for (auto v : img.data) mean += v;
    mean /= static_cast<double>(std::max<std::size_t>(1, img.data.size()));
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double px[3];
            for (int k = 0; k < 3; ++k) px[k] = img.at(x, y, k) * b;
            for (double& v : px) v = (v - mean) * c + mean;
            const double gray = 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
            for (int k = 0; k < 3; ++k)
                img.at(x, y, k) = static_cast<std::uint8_t>(std::clamp(std::lround(gray + (px[k] - gray) * s), 0L, 255L));
        }
}

struct Replica {
    RgbImage image;
    KeypointSet keypoints;
};

// Throws bounds when a keypoint leaves the frame.
Replica augment(const RgbImage& rgb, const KeypointSet& kps, const AugmentationConfig& aug, Rng& rng) {
    const int w = rgb.width, h = rgb.height;
    Replica r{rgb, kps};
    auto map_points = [&](auto&& fn) {
        KeypointSet next;
        for (const auto& [role, kp] : r.keypoints) {
            const PixelPoint p = fn(kp.point);
            if (!in_bounds(p, w, h))
                throw Error(ErrorKind::bounds, fmt::format("{} pushed out of frame", to_string(role)));
            next.add(role, {p, kp.object_index});
        }
        r.keypoints = std::move(next);
    };

    if (aug.rotate) {
        TransformSpec t;
        t.similarity.rotation = rng.uniform(-aug.rotation_max, aug.rotation_max);
        t.similarity.center = {w / 2.0, h / 2.0};
        map_points([&](PixelPoint p) { return apply_to_point(t, p); });
        r.image = warp(r.image, t);
    }
    if (aug.resized_crop) {
        const double s = rng.uniform(aug.crop_scale_min, 1.0);
        const double cw = s * w, ch = s * h;
        const double ox = rng.uniform(0.0, w - cw), oy = rng.uniform(0.0, h - ch);
        map_points([&](PixelPoint p) { return PixelPoint{(p.x - ox) * w / cw, (p.y - oy) * h / ch}; });
        r.image = crop_resize(r.image, ox, oy, cw, ch);
    }
    if (aug.hflip && rng.unit() < aug.flip_probability) {
        map_points([&](PixelPoint p) { return PixelPoint{w - 1 - p.x, p.y}; });
        r.image = flip_horizontal(r.image);
    }
    if (aug.vflip && rng.unit() < aug.flip_probability) {
        map_points([&](PixelPoint p) { return PixelPoint{p.x, h - 1 - p.y}; });
        r.image = flip_vertical(r.image);
    }
    if (aug.color_jitter) {
        const double b = rng.uniform(1.0 - aug.brightness, 1.0 + aug.brightness);
        const double c = rng.uniform(1.0 - aug.contrast, 1.0 + aug.contrast);
        const double s = rng.uniform(1.0 - aug.saturation, 1.0 + aug.saturation);
        jitter_colors(r.image, b, c, s);
    }
    return r;
}

}  // namespace

BuildResult build_records(const DatasetStore& store, const std::vector<std::string>& ids, HeadKind head,
                          const AugmentationConfig& aug, std::uint64_t seed, const fs::path& image_dir,
                          const PromptTemplate& prompt) {
    aug.check();
    BuildResult out;
    const int replicas = aug.any() ? aug.replicas : 1;
    for (const auto& id : ids) {
        const SceneRecord rec = store.load_record(id);
        const TaskSchema schema = store.schema_for(rec.task_id);
        if (auto report = validate_record(rec, schema); !report.empty())
            throw Error(ErrorKind::schema_mismatch, fmt::format("record {} is invalid: {}", id, report.front().message));
        std::optional<RgbImage> rgb;
        for (int k = 0; k < replicas; ++k) {
            FineTuneRecord ft;
            ft.source_id = id;
            ft.task_id = rec.task_id;
            ft.width = rec.width;
            ft.height = rec.height;
            ft.head = head;
            ft.prompt = prompt.render(rec.instruction, schema);
            if (!aug.any()) {
                ft.id = id;
                ft.image = (store.scene_dir(id) / rec.rgb_ref).string();
                ft.keypoints = rec.keypoints;
            } else {
                ft.id = fmt::format("{}#r{}", id, k);
                if (!rgb) rgb = store.load_rgb(rec);
                Rng rng(derive_seed({seed, fnv1a(id.data(), id.size()), static_cast<std::uint64_t>(k)}));
                try {
                    auto rep = augment(*rgb, rec.keypoints, aug, rng);
                    const fs::path file = image_dir / fmt::format("{}_r{}.png", id, k);
                    png::write_file_atomic(file, png::encode_rgb(rep.image));
                    ft.image = file.string();
                    ft.keypoints = std::move(rep.keypoints);
                } catch (const Error& e) {
                    if (e.kind() != ErrorKind::bounds) throw;
                    out.dropped.push_back(fmt::format("{}: {}", ft.id, e.what()));
                    spdlog::info("dropped replica {}: {}", ft.id, e.what());
                    continue;
                }
            }
            const auto coords = normalize_keypoints(ft.keypoints, ft.width, ft.height);
            if (head == HeadKind::natural_language) {
                ft.response = render_affordance_text(ft.keypoints, schema, ft.width, ft.height);
                if (parse_affordance_normalized(ft.response, schema, ParseMode::strict) != coords)
                    throw Error(ErrorKind::schema_mismatch, fmt::format("{}: response does not round-trip", ft.id));
            } else {
                for (auto role : kAllRoles) {
                    auto it = coords.find(role);
                    const bool present = it != coords.end() && schema.required_roles.count(role);
                    ft.targets.push_back(present ? it->second.nx : 0);
                    ft.targets.push_back(present ? it->second.ny : 0);
                    ft.mask.push_back(present);
                    ft.mask.push_back(present);
                }
            }
            out.records.push_back(std::move(ft));
        }
    }
    return out;
}

json to_json(const FineTuneRecord& r) {
    json j{{"id", r.id}, {"source_id", r.source_id}, {"task_id", r.task_id}, {"image", r.image},
           {"width", r.width}, {"height", r.height}, {"prompt", r.prompt}, {"keypoints", to_json(r.keypoints)}};
    if (r.head == HeadKind::natural_language) {
        j["response"] = r.response;
    } else {
        j["targets"] = r.targets;
        j["mask"] = r.mask;
    }
    return j;
}

void write_jsonl(const fs::path& path, const std::vector<FineTuneRecord>& records) {
    std::string out;
    for (const auto& r : records) out += to_json(r).dump() + "\n";
    png::write_file_atomic(path, out);
}

SplitResult split(const std::vector<SceneRecord>& records, const HoldoutSpec& holdout) {
    std::map<std::string, const SceneRecord*> by_id;
    for (const auto& r : records) by_id[r.record_id] = &r;
    for (const auto& id : holdout.record_ids)
        if (!by_id.count(id)) throw Error(ErrorKind::not_found, fmt::format("holdout names unknown record '{}'", id));

    auto selected = [&](const SceneRecord& r) {
        return holdout.object_sets.count(r.object_set) || holdout.record_ids.count(r.record_id);
    };
    // A record is tainted when it or any ancestor is selected.
    auto tainted = [&](const SceneRecord& r) {
        const SceneRecord* cur = &r;
        for (std::size_t depth = 0; cur && depth <= records.size(); ++depth) {
            if (selected(*cur)) return true;
            const auto* syn = cur->synthetic();
            if (!syn) return false;
            auto it = by_id.find(syn->parent_id);
            cur = it == by_id.end() ? nullptr : it->second;
        }
        return false;
    };

    SplitResult s;
    for (const auto& r : records) {
        // Object-set tags select human records; synthetic ones only by id.
        const bool to_test = holdout.record_ids.count(r.record_id) || (!r.is_synthetic() && selected(r));
        if (to_test) s.test.push_back(r.record_id);
        else if (tainted(r)) s.excluded.push_back(r.record_id);
        else s.train.push_back(r.record_id);
    }
    for (auto* v : {&s.train, &s.test, &s.excluded}) std::sort(v->begin(), v->end());

    std::vector<std::string> overlap;
    std::set_intersection(s.train.begin(), s.train.end(), s.test.begin(), s.test.end(), std::back_inserter(overlap));
    if (!overlap.empty()) throw Error(ErrorKind::conflict, fmt::format("record {} on both split sides", overlap.front()));
    if (s.train.empty()) throw Error(ErrorKind::empty_set, "split leaves the train side empty");
    if (s.test.empty() && !holdout.empty()) throw Error(ErrorKind::empty_set, "holdout rule selects no records");
    return s;
}

json split_manifest(const SplitResult& s, const HoldoutSpec& holdout) {
    return {{"rule", {{"object_sets", holdout.object_sets}, {"record_ids", holdout.record_ids}}},
            {"train", s.train},
            {"test", s.test},
            {"excluded", s.excluded}};
}

}  // namespace forge
