#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace forge {

// Continuous pixel coordinates: x is the column, y the row. Pixel (c, r)
// covers [c, c+1) x [r, r+1).
struct PixelPoint {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

inline bool in_bounds(PixelPoint p, int width, int height) {
    return p.x >= 0.0 && p.y >= 0.0 && p.x < width && p.y < height;
}

// 8-bit interleaved RGB.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    RgbImage() = default;
    RgbImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, fill) {}

    std::uint8_t& at(int x, int y, int c) { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
    std::uint8_t at(int x, int y, int c) const { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }

    friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

// Depth in meters; 0 marks a hole.
struct DepthImage {
    int width = 0;
    int height = 0;
    std::vector<float> meters;

    DepthImage() = default;
    DepthImage(int w, int h, float fill = 0.0f)
        : width(w), height(h), meters(static_cast<std::size_t>(w) * h, fill) {}

    float at(int x, int y) const { return meters[static_cast<std::size_t>(y) * width + x]; }
    float& at(int x, int y) { return meters[static_cast<std::size_t>(y) * width + x]; }

    friend bool operator==(const DepthImage&, const DepthImage&) = default;
};

class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height)
        : width_(width), height_(height), bits_(static_cast<std::size_t>(width) * height, 0) {}

    int width() const { return width_; }
    int height() const { return height_; }

    bool at(int x, int y) const { return bits_[index(x, y)] != 0; }
    void set(int x, int y, bool on = true) { bits_[index(x, y)] = on ? 1 : 0; }

    // False for coordinates outside the grid.
    bool test(int x, int y) const {
        return x >= 0 && y >= 0 && x < width_ && y < height_ && at(x, y);
    }

    std::size_t area() const;
    bool empty() const { return area() == 0; }
    bool same_shape(const BinaryMask& o) const { return width_ == o.width_ && height_ == o.height_; }

    // Mean of set-pixel centers; requires a non-empty mask.
    PixelPoint centroid() const;

    const std::vector<std::uint8_t>& bits() const { return bits_; }

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b);

enum class ContextKind { soft_edge, depth, seg_mask };

const char* to_string(ContextKind kind);
ContextKind context_kind_from_string(const std::string& name);

// Scalar guidance map with values in [0, 1].
struct ContextImage {
    int width = 0;
    int height = 0;
    std::vector<double> values;
    ContextKind kind = ContextKind::soft_edge;

    ContextImage() = default;
    ContextImage(int w, int h, ContextKind k, double fill = 0.0)
        : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill), kind(k) {}

    double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
    double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
};

}  // namespace forge
