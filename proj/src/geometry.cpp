#include "forge/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "forge/error.hpp"
#include "forge/random.hpp"

namespace forge {

void TransformConfig::check() const {
    if (!(scale_min > 0.0) || scale_min > scale_max)
        throw Error(ErrorKind::invalid_argument, fmt::format("invalid scale range [{}, {}]", scale_min, scale_max));
    if (!(rotation_max >= 0.0) || !(translation_frac >= 0.0) || !(elastic_alpha_max >= 0.0))
        throw Error(ErrorKind::invalid_argument, "rotation, translation and elastic bounds must be >= 0");
    if (elastic_alpha_max > 0.0 && (elastic_grid < 2 || !(elastic_sigma >= 0.0)))
        throw Error(ErrorKind::invalid_argument, "elastic grid needs >= 2 control points per axis and sigma >= 0");
}

TransformConfig TransformConfig::identity() {
    TransformConfig c;
    c.scale_min = c.scale_max = 1.0;
    c.rotation_max = 0.0;
    c.translation_frac = 0.0;
    c.elastic_alpha_max = 0.0;
    return c;
}

bool TransformSpec::is_identity() const {
    const auto& s = similarity;
    return s.scale == 1.0 && s.rotation == 0.0 && s.dx == 0.0 && s.dy == 0.0 && !elastic;
}

TransformSpec TransformSpec::inverse() const {
    if (elastic) throw Error(ErrorKind::invalid_argument, "closed-form inverse exists only for similarity transforms");
    TransformSpec inv;
    inv.seed = seed;
    inv.similarity.scale = 1.0 / similarity.scale;
    inv.similarity.rotation = -similarity.rotation;
    inv.similarity.center = {similarity.center.x + similarity.dx, similarity.center.y + similarity.dy};
    inv.similarity.dx = -similarity.dx;
    inv.similarity.dy = -similarity.dy;
    return inv;
}

PixelPoint ElasticParams::displacement(PixelPoint p) const {
    const double sx = grid_cols > 1 ? (image_width - 1.0) / (grid_cols - 1) : 1.0;
    const double sy = grid_rows > 1 ? (image_height - 1.0) / (grid_rows - 1) : 1.0;
    const double gx = std::clamp(p.x / sx, 0.0, grid_cols - 1.0);
    const double gy = std::clamp(p.y / sy, 0.0, grid_rows - 1.0);
    const int x0 = std::min(static_cast<int>(gx), grid_cols - 2);
    const int y0 = std::min(static_cast<int>(gy), grid_rows - 2);
    const double fx = gx - x0, fy = gy - y0;
    auto lerp2 = [&](const std::vector<double>& f) {
        auto v = [&](int x, int y) { return f[static_cast<std::size_t>(y) * grid_cols + x]; };
        return (1 - fy) * ((1 - fx) * v(x0, y0) + fx * v(x0 + 1, y0)) + fy * ((1 - fx) * v(x0, y0 + 1) + fx * v(x0 + 1, y0 + 1));
    };
    return {lerp2(dx), lerp2(dy)};
}

namespace {

std::vector<double> smooth_grid(const std::vector<double>& f, int cols, int rows, double sigma_x, double sigma_y) {
    auto pass = [](const std::vector<double>& in, int cols, int rows, double sigma, bool horizontal) {
        if (sigma <= 1e-9) return in;
        const int radius = static_cast<int>(std::ceil(3.0 * sigma));
        std::vector<double> out(in.size(), 0.0);
        for (int y = 0; y < rows; ++y) {
            for (int x = 0; x < cols; ++x) {
                double acc = 0.0, wsum = 0.0;
                for (int k = -radius; k <= radius; ++k) {
                    const int xx = horizontal ? x + k : x;
                    const int yy = horizontal ? y : y + k;
                    if (xx < 0 || yy < 0 || xx >= cols || yy >= rows) continue;
                    const double w = std::exp(-0.5 * k * k / (sigma * sigma));
                    acc += w * in[static_cast<std::size_t>(yy) * cols + xx];
                    wsum += w;
                }
                out[static_cast<std::size_t>(y) * cols + x] = acc / wsum;
            }
        }
        return out;
    };
    return pass(pass(f, cols, rows, sigma_x, true), cols, rows, sigma_y, false);
}

}  // namespace

TransformSpec sample_transform(const TransformConfig& cfg, std::uint64_t seed, int width, int height,
                               PixelPoint pivot) {
    cfg.check();
    if (width < 1 || height < 1) throw Error(ErrorKind::invalid_argument, "image dimensions must be >= 1");
    Rng rng(seed);
    TransformSpec t;
    t.seed = seed;
    // Draw order is part of the reproducibility contract.
    t.similarity.scale = rng.uniform(cfg.scale_min, cfg.scale_max);
    t.similarity.rotation = rng.uniform(-cfg.rotation_max, cfg.rotation_max);
    t.similarity.dx = rng.uniform(-cfg.translation_frac * width, cfg.translation_frac * width);
    t.similarity.dy = rng.uniform(-cfg.translation_frac * height, cfg.translation_frac * height);
    t.similarity.center = pivot;
    if (cfg.rotation_max == 0.0) t.similarity.rotation = 0.0;  // avoid -0.0

    if (cfg.elastic_alpha_max > 0.0) {
        ElasticParams e;
        e.grid_cols = e.grid_rows = cfg.elastic_grid;
        e.image_width = width;
        e.image_height = height;
        e.smoothing_sigma = cfg.elastic_sigma;
        e.magnitude_alpha = rng.uniform(0.0, cfg.elastic_alpha_max);
        const std::size_t n = static_cast<std::size_t>(e.grid_cols) * e.grid_rows;
        e.dx.resize(n);
        e.dy.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            e.dx[i] = rng.normal();
            e.dy[i] = rng.normal();
        }
        const double spacing_x = std::max(1.0, (width - 1.0) / (e.grid_cols - 1));
        const double spacing_y = std::max(1.0, (height - 1.0) / (e.grid_rows - 1));
        e.dx = smooth_grid(e.dx, e.grid_cols, e.grid_rows, e.smoothing_sigma / spacing_x, e.smoothing_sigma / spacing_y);
        e.dy = smooth_grid(e.dy, e.grid_cols, e.grid_rows, e.smoothing_sigma / spacing_x, e.smoothing_sigma / spacing_y);
        double peak = 0.0;
        for (std::size_t i = 0; i < n; ++i) peak = std::max(peak, std::hypot(e.dx[i], e.dy[i]));
        const double gain = peak > 0.0 ? e.magnitude_alpha / peak : 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            e.dx[i] *= gain;
            e.dy[i] *= gain;
        }
        t.elastic = std::move(e);
    }
    return t;
}

namespace {

PixelPoint apply_similarity(const SimilarityParams& s, PixelPoint p) {
    const double c = std::cos(s.rotation), sn = std::sin(s.rotation);
    const double ux = s.scale * (p.x - s.center.x), uy = s.scale * (p.y - s.center.y);
    return {c * ux - sn * uy + s.center.x + s.dx, sn * ux + c * uy + s.center.y + s.dy};
}

PixelPoint invert_similarity(const SimilarityParams& s, PixelPoint q) {
    const double c = std::cos(s.rotation), sn = std::sin(s.rotation);
    const double vx = q.x - s.center.x - s.dx, vy = q.y - s.center.y - s.dy;
    return {(c * vx + sn * vy) / s.scale + s.center.x, (-sn * vx + c * vy) / s.scale + s.center.y};
}

}  // namespace

PixelPoint apply_to_point(const TransformSpec& t, PixelPoint p) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw Error(ErrorKind::invalid_argument, "non-finite point");
    PixelPoint q = apply_similarity(t.similarity, p);
    if (t.elastic) {
        const PixelPoint d = t.elastic->displacement(q);
        q.x += d.x;
        q.y += d.y;
    }
    return q;
}

PixelPoint apply_to_point_in_frame(const TransformSpec& t, PixelPoint p, int width, int height, OutOfFrame policy) {
    PixelPoint q = apply_to_point(t, p);
    if (in_bounds(q, width, height)) return q;
    if (policy == OutOfFrame::reject)
        throw Error(ErrorKind::bounds, fmt::format("transformed point ({:.3f}, {:.3f}) leaves the {}x{} frame", q.x, q.y,
                                                   width, height));
    q.x = std::clamp(q.x, 0.0, std::nextafter(static_cast<double>(width), 0.0));
    q.y = std::clamp(q.y, 0.0, std::nextafter(static_cast<double>(height), 0.0));
    return q;
}

PixelPoint inverse_map(const TransformSpec& t, PixelPoint q) {
    PixelPoint u = q;
    if (t.elastic) {
        // Solve u + d(u) = q; the field is smooth and small so this contracts.
        for (int i = 0; i < 12; ++i) {
            const PixelPoint d = t.elastic->displacement(u);
            u = {q.x - d.x, q.y - d.y};
        }
    }
    return invert_similarity(t.similarity, u);
}

BinaryMask apply_to_mask(const TransformSpec& t, const BinaryMask& m) {
    if (m.empty()) throw Error(ErrorKind::empty_mask, "cannot transform an empty mask");
    BinaryMask out(m.width(), m.height());
    if (t.is_identity()) return m;
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            const PixelPoint src = inverse_map(t, {x + 0.5, y + 0.5});
            if (m.test(static_cast<int>(std::floor(src.x)), static_cast<int>(std::floor(src.y)))) out.set(x, y);
        }
    }
    if (out.empty()) throw Error(ErrorKind::empty_mask, "transformed mask lies entirely outside the frame");
    return out;
}

namespace {

double sample_bilinear(const ContextImage& c, PixelPoint p) {
    const double u = p.x - 0.5, v = p.y - 0.5;
    const int x0 = static_cast<int>(std::floor(u)), y0 = static_cast<int>(std::floor(v));
    const double fx = u - x0, fy = v - y0;
    auto val = [&](int x, int y) {
        return (x < 0 || y < 0 || x >= c.width || y >= c.height) ? 0.0 : c.at(x, y);
    };
    return (1 - fy) * ((1 - fx) * val(x0, y0) + fx * val(x0 + 1, y0)) +
           fy * ((1 - fx) * val(x0, y0 + 1) + fx * val(x0 + 1, y0 + 1));
}

}  // namespace

ContextImage apply_to_context(const TransformSpec& t, const ContextImage& masked_context, const BinaryMask& m) {
    if (masked_context.width != m.width() || masked_context.height != m.height())
        throw Error(ErrorKind::dimension_mismatch, "context and mask dimensions differ");
    const BinaryMask region = apply_to_mask(t, m);
    ContextImage out(masked_context.width, masked_context.height, masked_context.kind);
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            if (!region.at(x, y)) continue;
            const double v = t.is_identity() ? masked_context.at(x, y)
                                             : sample_bilinear(masked_context, inverse_map(t, {x + 0.5, y + 0.5}));
            out.at(x, y) = std::clamp(v, 0.0, 1.0);
        }
    }
    return out;
}

BinaryMask compose_inpaint_region(const BinaryMask& m, const TransformSpec& t) {
    if (m.empty()) return m;
    try {
        return mask_union(m, apply_to_mask(t, m));
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::empty_mask) throw;
        return m;
    }
}

PlacementVerdict check_placement(const TransformSpec& t, const BinaryMask& m, const std::vector<BinaryMask>& other_masks,
                                 int margin) {
    if (margin < 0) throw Error(ErrorKind::invalid_argument, "negative placement margin");
    for (const auto& o : other_masks)
        if (!o.same_shape(m)) throw Error(ErrorKind::dimension_mismatch, "placement masks differ in size");

    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x)
            if (m.at(x, y) && !in_bounds(apply_to_point(t, {x + 0.5, y + 0.5}), m.width(), m.height()))
                return {false, fmt::format("object pixel ({}, {}) leaves the frame", x, y)};

    BinaryMask placed;
    try {
        placed = apply_to_mask(t, m);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::empty_mask) throw;
        return {false, "transformed object is empty"};
    }

    const int r2 = margin * margin;
    for (std::size_t k = 0; k < other_masks.size(); ++k) {
        const auto& other = other_masks[k];
        for (int y = 0; y < placed.height(); ++y) {
            for (int x = 0; x < placed.width(); ++x) {
                if (!placed.at(x, y)) continue;
                for (int oy = -margin; oy <= margin; ++oy)
                    for (int ox = -margin; ox <= margin; ++ox)
                        if (ox * ox + oy * oy <= r2 && other.test(x + ox, y + oy))
                            return {false, fmt::format("collides with object mask {} near ({}, {})", k, x, y)};
            }
        }
    }
    return {true, {}};
}

}  // namespace forge
