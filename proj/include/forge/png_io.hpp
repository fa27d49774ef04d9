#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "forge/image.hpp"

namespace forge::png {

using Bytes = std::vector<std::uint8_t>;

Bytes encode_rgb(const RgbImage& img);
RgbImage decode_rgb(const Bytes& bytes);

// 8-bit grayscale, 0 / 255.
Bytes encode_mask(const BinaryMask& mask);
// Any nonzero sample is treated as set.
BinaryMask decode_mask(const Bytes& bytes);

// 16-bit grayscale in millimeters.
Bytes encode_depth(const DepthImage& depth);
DepthImage decode_depth(const Bytes& bytes);

// 8-bit grayscale, value * 255 rounded.
Bytes encode_context(const ContextImage& ctx);
ContextImage decode_context(const Bytes& bytes, ContextKind kind);

Bytes read_file(const std::filesystem::path& path);
// Writes through a temporary sibling and renames over the target.
void write_file_atomic(const std::filesystem::path& path, const Bytes& bytes);
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace forge::png
