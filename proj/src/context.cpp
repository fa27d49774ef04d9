#include "forge/context.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "forge/error.hpp"

namespace forge {
namespace {

constexpr double kSmoothSigma = 1.0;
constexpr double kPercentile = 0.99;

// Separable Gaussian with replicated borders.
std::vector<double> gaussian_blur(const std::vector<double>& in, int w, int h, double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) sum += kernel[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
    for (double& v : kernel) v /= sum;

    std::vector<double> tmp(in.size()), out(in.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += kernel[k + radius] * in[static_cast<std::size_t>(y) * w + std::clamp(x + k, 0, w - 1)];
            tmp[static_cast<std::size_t>(y) * w + x] = acc;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += kernel[k + radius] * tmp[static_cast<std::size_t>(std::clamp(y + k, 0, h - 1)) * w + x];
            out[static_cast<std::size_t>(y) * w + x] = acc;
        }
    return out;
}

}  // namespace

ContextImage compute_soft_edge(const RgbImage& rgb) {
    const int w = rgb.width, h = rgb.height;
    if (w < 3 || h < 3) throw Error(ErrorKind::invalid_argument, "soft edge needs an image of at least 3x3");

    std::vector<double> strength(static_cast<std::size_t>(w) * h, 0.0);
    std::vector<double> channel(strength.size());
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) channel[static_cast<std::size_t>(y) * w + x] = rgb.at(x, y, c) / 255.0;
        const auto s = gaussian_blur(channel, w, h, kSmoothSigma);
        auto v = [&](int x, int y) {
            return s[static_cast<std::size_t>(std::clamp(y, 0, h - 1)) * w + std::clamp(x, 0, w - 1)];
        };
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const double gx = 3.0 * (v(x + 1, y - 1) - v(x - 1, y - 1)) + 10.0 * (v(x + 1, y) - v(x - 1, y)) +
                                  3.0 * (v(x + 1, y + 1) - v(x - 1, y + 1));
                const double gy = 3.0 * (v(x - 1, y + 1) - v(x - 1, y - 1)) + 10.0 * (v(x, y + 1) - v(x, y - 1)) +
                                  3.0 * (v(x + 1, y + 1) - v(x + 1, y - 1));
                auto& out = strength[static_cast<std::size_t>(y) * w + x];
                out = std::max(out, std::hypot(gx, gy));
            }
        }
    }

    std::vector<double> sorted = strength;
    const std::size_t rank = static_cast<std::size_t>(std::ceil(kPercentile * static_cast<double>(sorted.size()))) - 1;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank), sorted.end());
    const double scale = std::max(sorted[rank], std::numeric_limits<double>::epsilon());

    ContextImage ctx(w, h, ContextKind::soft_edge);
    for (std::size_t i = 0; i < strength.size(); ++i) ctx.values[i] = std::clamp(strength[i] / scale, 0.0, 1.0);
    return ctx;
}

ContextImage compute_depth_context(const DepthImage& depth, const BinaryMask& m) {
    if (depth.width == 0 || depth.height == 0) throw Error(ErrorKind::missing_depth, "no depth image available");
    if (depth.width != m.width() || depth.height != m.height())
        throw Error(ErrorKind::dimension_mismatch, "depth and mask dimensions differ");
    if (m.empty()) throw Error(ErrorKind::empty_mask, "depth context needs a non-empty mask");

    auto valid = [](float d) { return std::isfinite(d) && d > 0.0f; };
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x)
            if (m.at(x, y) && valid(depth.at(x, y))) {
                lo = std::min(lo, static_cast<double>(depth.at(x, y)));
                hi = std::max(hi, static_cast<double>(depth.at(x, y)));
            }
    if (!(lo <= hi)) throw Error(ErrorKind::missing_depth, "no valid depth under the mask");

    ContextImage ctx(m.width(), m.height(), ContextKind::depth);
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x) {
            if (!m.at(x, y) || !valid(depth.at(x, y))) continue;
            ctx.at(x, y) = hi > lo ? (hi - depth.at(x, y)) / (hi - lo) : 0.5;
        }
    return ctx;
}

ContextImage compute_mask_context(const BinaryMask& m) {
    ContextImage ctx(m.width(), m.height(), ContextKind::seg_mask);
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x)
            if (m.at(x, y)) ctx.at(x, y) = 1.0;
    return ctx;
}

ContextImage masked_context(const ContextImage& c, const BinaryMask& m) {
    if (c.width != m.width() || c.height != m.height())
        throw Error(ErrorKind::dimension_mismatch, "context and mask dimensions differ");
    ContextImage out(c.width, c.height, c.kind);
    for (int y = 0; y < c.height; ++y)
        for (int x = 0; x < c.width; ++x)
            if (m.at(x, y)) out.at(x, y) = c.at(x, y);
    return out;
}

}  // namespace forge
