#include "forge/image.hpp"

#include <algorithm>
#include <string>

#include "forge/error.hpp"

namespace forge {

std::size_t BinaryMask::area() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

PixelPoint BinaryMask::centroid() const {
    double sx = 0.0, sy = 0.0;
    std::size_t n = 0;
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x) {
            if (at(x, y)) {
                sx += x + 0.5;
                sy += y + 0.5;
                ++n;
            }
        }
    }
    if (n == 0) throw Error(ErrorKind::empty_mask, "centroid of an empty mask");
    return {sx / static_cast<double>(n), sy / static_cast<double>(n)};
}

BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b) {
    if (!a.same_shape(b)) throw Error(ErrorKind::dimension_mismatch, "mask union of differently sized masks");
    BinaryMask out(a.width(), a.height());
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x)
            if (a.at(x, y) || b.at(x, y)) out.set(x, y);
    return out;
}

const char* to_string(ContextKind kind) {
    switch (kind) {
        case ContextKind::soft_edge: return "soft_edge";
        case ContextKind::depth: return "depth";
        case ContextKind::seg_mask: return "seg_mask";
    }
    return "soft_edge";
}

ContextKind context_kind_from_string(const std::string& name) {
    if (name == "soft_edge") return ContextKind::soft_edge;
    if (name == "depth") return ContextKind::depth;
    if (name == "seg_mask") return ContextKind::seg_mask;
    throw Error(ErrorKind::invalid_argument, "unknown context kind '" + name + "' (expected soft_edge, depth or seg_mask)");
}

}  // namespace forge
