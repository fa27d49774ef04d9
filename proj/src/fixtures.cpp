#include "forge/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "forge/random.hpp"

namespace forge {
namespace {

struct OrientedBox {
    PixelPoint center;
    double angle = 0.0;  // long axis direction
    double half_len = 0.0;
    double half_wid = 0.0;

    bool contains(PixelPoint p) const {
        const double dx = p.x - center.x, dy = p.y - center.y;
        const double u = dx * std::cos(angle) + dy * std::sin(angle);
        const double v = -dx * std::sin(angle) + dy * std::cos(angle);
        return std::abs(u) <= half_len && std::abs(v) <= half_wid;
    }
};

void paint(RgbImage& img, BinaryMask& mask, DepthImage& depth, const OrientedBox& box, const int rgb[3], float z,
           Rng& texture) {
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            if (!box.contains({x + 0.5, y + 0.5})) continue;
            const int jitter = static_cast<int>(texture.below(9)) - 4;
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(rgb[c] + jitter, 0, 255));
            mask.set(x, y);
            depth.at(x, y) = z;
        }
}

}  // namespace

FixtureScene make_sweeping_scene(int index, const FixtureOptions& opts) {
    const int w = opts.width, h = opts.height;
    Rng layout(derive_seed({opts.seed, static_cast<std::uint64_t>(index), 1}));
    Rng texture(derive_seed({opts.seed, static_cast<std::uint64_t>(index), 2}));

    const double margin = 8.0;
    for (;;) {
    OrientedBox handle, bristles, package;
    PixelPoint pre, post;
    // Rejection-sample a layout with everything comfortably inside the frame.
    for (;;) {
        const double angle = layout.uniform(-std::numbers::pi, std::numbers::pi);
        const PixelPoint bc{layout.uniform(0.2 * w, 0.8 * w), layout.uniform(0.2 * h, 0.8 * h)};
        const double hl = 13.0, bl = 6.0;
        const PixelPoint dir{std::cos(angle), std::sin(angle)};
        handle = {{bc.x - dir.x * bl, bc.y - dir.y * bl}, angle, hl, 2.5};
        bristles = {{bc.x + dir.x * hl, bc.y + dir.y * hl}, angle, bl, 7.0};
        package = {{layout.uniform(0.2 * w, 0.8 * w), layout.uniform(0.2 * h, 0.8 * h)},
                   layout.uniform(0.0, std::numbers::pi), layout.uniform(8.0, 12.0), layout.uniform(5.0, 8.0)};
        const double sx = package.center.x - bristles.center.x, sy = package.center.y - bristles.center.y;
        const double dist = std::hypot(sx, sy);
        if (dist < 38.0) continue;
        const PixelPoint sweep{sx / dist, sy / dist};
        pre = {package.center.x - sweep.x * 20.0, package.center.y - sweep.y * 20.0};
        post = {package.center.x + sweep.x * 20.0, package.center.y + sweep.y * 20.0};
        bool ok = true;
        for (const auto* b : {&handle, &bristles, &package}) {
            const double r = b->half_len + b->half_wid;
            ok &= b->center.x - r >= margin && b->center.x + r <= w - margin && b->center.y - r >= margin &&
                  b->center.y + r <= h - margin;
        }
        for (auto p : {pre, post}) ok &= p.x >= margin && p.x <= w - margin && p.y >= margin && p.y <= h - margin;
        if (ok) break;
    }

    RgbImage rgb(w, h);
    DepthImage depth(w, h, 0.80f);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int grain = static_cast<int>(texture.below(7)) + ((x / 6 + y / 9) % 2) * 4;
            rgb.at(x, y, 0) = static_cast<std::uint8_t>(196 + grain);
            rgb.at(x, y, 1) = static_cast<std::uint8_t>(172 + grain);
            rgb.at(x, y, 2) = static_cast<std::uint8_t>(138 + grain);
        }

    BinaryMask brush_mask(w, h), package_mask(w, h);
    const int handle_rgb[3] = {120, 72, 36}, bristle_rgb[3] = {40, 40, 48};
    const int package_rgb[3] = {static_cast<int>(layout.below(200)) + 30, static_cast<int>(layout.below(200)) + 30,
                                static_cast<int>(layout.below(200)) + 30};
    paint(rgb, package_mask, depth, package, package_rgb, 0.76f, texture);
    paint(rgb, brush_mask, depth, handle, handle_rgb, 0.77f, texture);
    paint(rgb, brush_mask, depth, bristles, bristle_rgb, 0.775f, texture);
    // Brush painted last wins; keep the two masks disjoint.
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (brush_mask.at(x, y)) package_mask.set(x, y, false);

    auto inside = [](const BinaryMask& m, PixelPoint p) {
        return m.test(static_cast<int>(p.x), static_cast<int>(p.y));
    };
    if (!inside(brush_mask, handle.center) || !inside(brush_mask, bristles.center) ||
        !inside(package_mask, package.center))
        continue;

    SceneRecord r;
    r.record_id = fmt::format("human-{:03d}", index);
    r.task_id = "table_sweeping";
    r.object_set = index >= opts.count - opts.novel_count ? "novel" : "seen";
    r.width = w;
    r.height = h;
    r.instruction = "Use the brush to sweep the snack package.";
    r.objects = {{"brush", std::nullopt}, {"snack package", std::nullopt}};
    r.keypoints.add(KeypointRole::grasp, {handle.center, 0});
    r.keypoints.add(KeypointRole::function, {bristles.center, 0});
    r.keypoints.add(KeypointRole::target, {package.center, 1});
    r.keypoints.add(KeypointRole::pre_contact, {pre, 1});
    r.keypoints.add(KeypointRole::post_contact, {post, 1});

    return {std::move(r), SceneAssets{std::move(rgb), std::move(depth), {brush_mask, package_mask}}};
    }
}

void write_sweeping_fixtures(DatasetStore& store, const FixtureOptions& opts) {
    for (int i = 0; i < opts.count; ++i) {
        auto scene = make_sweeping_scene(i, opts);
        store.put_scene(std::move(scene.record), scene.assets);
    }
    store.rebuild_index();
}

}  // namespace forge
