#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "forge/image.hpp"

namespace forge {

// Ranges h(.) is sampled from. Collapsing every range to its identity value
// yields the identity transform.
struct TransformConfig {
    double scale_min = 0.75;
    double scale_max = 1.25;
    double rotation_max = 0.5235987755982988;  // 30 degrees
    // Translation bound as a fraction of the image width / height.
    double translation_frac = 0.15;
    // Elastic distortion is disabled when this is 0.
    double elastic_alpha_max = 8.0;
    int elastic_grid = 8;
    double elastic_sigma = 24.0;

    void check() const;
    static TransformConfig identity();
};

struct SimilarityParams {
    double scale = 1.0;
    double rotation = 0.0;
    double dx = 0.0;
    double dy = 0.0;
    PixelPoint center;

    friend bool operator==(const SimilarityParams&, const SimilarityParams&) = default;
};

// Displacements on a grid_cols x grid_rows lattice of control points spanning
// the image corners, bilinearly interpolated between them.
struct ElasticParams {
    int grid_cols = 0;
    int grid_rows = 0;
    int image_width = 0;
    int image_height = 0;
    double smoothing_sigma = 0.0;
    double magnitude_alpha = 0.0;
    std::vector<double> dx;  // row-major, grid_rows * grid_cols
    std::vector<double> dy;

    PixelPoint displacement(PixelPoint p) const;

    friend bool operator==(const ElasticParams&, const ElasticParams&) = default;
};

struct TransformSpec {
    SimilarityParams similarity;
    std::optional<ElasticParams> elastic;
    std::uint64_t seed = 0;

    static TransformSpec identity() { return {}; }
    bool is_identity() const;
    // Similarity-only specs only.
    TransformSpec inverse() const;

    friend bool operator==(const TransformSpec&, const TransformSpec&) = default;
};

TransformSpec sample_transform(const TransformConfig& cfg, std::uint64_t seed, int width, int height,
                               PixelPoint pivot);

// Similarity about the pivot, then the elastic displacement sampled at the result.
PixelPoint apply_to_point(const TransformSpec& t, PixelPoint p);

enum class OutOfFrame { reject, clamp };

// apply_to_point plus a frame check: throws bounds on reject, clamps otherwise.
PixelPoint apply_to_point_in_frame(const TransformSpec& t, PixelPoint p, int width, int height,
                                   OutOfFrame policy = OutOfFrame::reject);

// Pre-image of q under t. Exact for similarity-only specs; the elastic part is
// inverted by fixed-point iteration.
PixelPoint inverse_map(const TransformSpec& t, PixelPoint q);

// Nearest-neighbor inverse warp; throws empty_mask when nothing lands in frame.
BinaryMask apply_to_mask(const TransformSpec& t, const BinaryMask& m);

// Bilinear inverse warp of a masked context, zeroed outside apply_to_mask(t, m).
ContextImage apply_to_context(const TransformSpec& t, const ContextImage& masked_context, const BinaryMask& m);

// m OR h(m).
BinaryMask compose_inpaint_region(const BinaryMask& m, const TransformSpec& t);

struct PlacementVerdict {
    bool accepted = true;
    std::string reason;

    explicit operator bool() const { return accepted; }
};

PlacementVerdict check_placement(const TransformSpec& t, const BinaryMask& m, const std::vector<BinaryMask>& other_masks,
                                 int margin);

}  // namespace forge
