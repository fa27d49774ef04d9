#include "forge/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>

#include "forge/error.hpp"

namespace forge::png {
namespace {

struct ReadCursor {
    const Bytes* bytes;
    std::size_t pos;
};

void read_from_memory(png_structp png, png_bytep out, png_size_t n) {
    auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
    if (cur->pos + n > cur->bytes->size()) png_error(png, "truncated PNG stream");
    std::memcpy(out, cur->bytes->data() + cur->pos, n);
    cur->pos += n;
}

void write_to_memory(png_structp png, png_bytep in, png_size_t n) {
    auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
    out->insert(out->end(), in, in + n);
}

void flush_noop(png_structp) {}

// Raw decoded samples. Bytes per sample is 1 or 2 (16-bit is big-endian).
struct Raw {
    png_uint_32 width = 0;
    png_uint_32 height = 0;
    int channels = 0;
    int bit_depth = 0;
    Bytes samples;
};

// setjmp-protected bodies keep only trivially destructible locals.
bool encode_raw(Bytes* out, const Raw* raw, int color_type) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) return false;
    png_infop info = png_create_info_struct(png);
    if (!info || setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        return false;
    }
    png_set_write_fn(png, out, write_to_memory, flush_noop);
    png_set_IHDR(png, info, raw->width, raw->height, raw->bit_depth, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    // Fixed settings so identical pixels always encode to identical bytes.
    png_set_compression_level(png, 6);
    png_write_info(png, info);
    const std::size_t stride = static_cast<std::size_t>(raw->width) * raw->channels * (raw->bit_depth / 8);
    for (png_uint_32 y = 0; y < raw->height; ++y)
        png_write_row(png, const_cast<png_bytep>(raw->samples.data() + y * stride));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return true;
}

// want_channels: 1 gray or 3 RGB; keep_16 keeps 16-bit samples.
bool decode_raw(Raw* raw, ReadCursor* cur, int want_channels, bool keep_16) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) return false;
    png_infop info = png_create_info_struct(png);
    if (!info || setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        return false;
    }
    png_set_read_fn(png, cur, read_from_memory);
    png_read_info(png, info);
    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
    if (depth == 16 && !keep_16) png_set_strip_16(png);
    const bool is_gray = (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA);
    if (want_channels == 3 && is_gray) png_set_gray_to_rgb(png);
    if (want_channels == 1 && !is_gray) png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    png_read_update_info(png, info);
    raw->width = png_get_image_width(png, info);
    raw->height = png_get_image_height(png, info);
    raw->channels = png_get_channels(png, info);
    raw->bit_depth = png_get_bit_depth(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);
    raw->samples.resize(stride * raw->height);
    for (png_uint_32 y = 0; y < raw->height; ++y) png_read_row(png, raw->samples.data() + y * stride, nullptr);
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return true;
}

Bytes encode(const Raw& raw, int color_type) {
    Bytes out;
    if (!encode_raw(&out, &raw, color_type)) throw Error(ErrorKind::io, "PNG encoding failed");
    return out;
}

Raw decode(const Bytes& bytes, int want_channels, bool keep_16) {
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0)
        throw Error(ErrorKind::io, "not a PNG stream");
    Raw raw;
    ReadCursor cur{&bytes, 0};
    if (!decode_raw(&raw, &cur, want_channels, keep_16)) throw Error(ErrorKind::io, "malformed PNG stream");
    if (raw.channels != want_channels) throw Error(ErrorKind::io, "unexpected PNG channel layout");
    return raw;
}

}  // namespace

Bytes encode_rgb(const RgbImage& img) {
    Raw raw{static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 3, 8, img.data};
    return encode(raw, PNG_COLOR_TYPE_RGB);
}

RgbImage decode_rgb(const Bytes& bytes) {
    Raw raw = decode(bytes, 3, false);
    RgbImage img;
    img.width = static_cast<int>(raw.width);
    img.height = static_cast<int>(raw.height);
    img.data = std::move(raw.samples);
    return img;
}

Bytes encode_mask(const BinaryMask& mask) {
    Raw raw{static_cast<png_uint_32>(mask.width()), static_cast<png_uint_32>(mask.height()), 1, 8, {}};
    raw.samples.reserve(mask.bits().size());
    for (auto b : mask.bits()) raw.samples.push_back(b ? 255 : 0);
    return encode(raw, PNG_COLOR_TYPE_GRAY);
}

BinaryMask decode_mask(const Bytes& bytes) {
    Raw raw = decode(bytes, 1, false);
    BinaryMask mask(static_cast<int>(raw.width), static_cast<int>(raw.height));
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (raw.samples[static_cast<std::size_t>(y) * raw.width + x] != 0) mask.set(x, y);
    return mask;
}

Bytes encode_depth(const DepthImage& depth) {
    Raw raw{static_cast<png_uint_32>(depth.width), static_cast<png_uint_32>(depth.height), 1, 16, {}};
    raw.samples.reserve(depth.meters.size() * 2);
    for (float m : depth.meters) {
        const double mm = std::isfinite(m) && m > 0.0f ? std::round(static_cast<double>(m) * 1000.0) : 0.0;
        const auto v = static_cast<std::uint16_t>(std::min(mm, 65535.0));
        raw.samples.push_back(static_cast<std::uint8_t>(v >> 8));
        raw.samples.push_back(static_cast<std::uint8_t>(v & 0xff));
    }
    return encode(raw, PNG_COLOR_TYPE_GRAY);
}

DepthImage decode_depth(const Bytes& bytes) {
    Raw raw = decode(bytes, 1, true);
    if (raw.bit_depth != 16) throw Error(ErrorKind::io, "depth PNG must be 16-bit grayscale");
    DepthImage depth(static_cast<int>(raw.width), static_cast<int>(raw.height));
    for (std::size_t i = 0; i < depth.meters.size(); ++i) {
        const unsigned v = (static_cast<unsigned>(raw.samples[2 * i]) << 8) | raw.samples[2 * i + 1];
        depth.meters[i] = static_cast<float>(v / 1000.0);
    }
    return depth;
}

Bytes encode_context(const ContextImage& ctx) {
    Raw raw{static_cast<png_uint_32>(ctx.width), static_cast<png_uint_32>(ctx.height), 1, 8, {}};
    raw.samples.reserve(ctx.values.size());
    for (double v : ctx.values) raw.samples.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
    return encode(raw, PNG_COLOR_TYPE_GRAY);
}

ContextImage decode_context(const Bytes& bytes, ContextKind kind) {
    Raw raw = decode(bytes, 1, false);
    ContextImage ctx(static_cast<int>(raw.width), static_cast<int>(raw.height), kind);
    for (std::size_t i = 0; i < ctx.values.size(); ++i) ctx.values[i] = raw.samples[i] / 255.0;
    return ctx;
}

Bytes read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

namespace {
template <typename Buffer>
void write_atomic(const std::filesystem::path& path, const Buffer& buf) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::io, "cannot write " + tmp.string());
        out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (!out) throw Error(ErrorKind::io, "short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}
}  // namespace

void write_file_atomic(const std::filesystem::path& path, const Bytes& bytes) { write_atomic(path, bytes); }
void write_file_atomic(const std::filesystem::path& path, const std::string& text) { write_atomic(path, text); }

}  // namespace forge::png
