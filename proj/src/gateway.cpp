#include "forge/gateway.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "forge/dataset.hpp"
#include "forge/error.hpp"
#include "forge/random.hpp"

namespace forge {

void ServiceEndpoint::check() const {
    if (base_url.empty()) throw Error(ErrorKind::invalid_argument, "service endpoint without base URL");
    if (!(timeout_s > 0.0)) throw Error(ErrorKind::invalid_argument, "service timeout must be > 0");
    if (max_retries < 0) throw Error(ErrorKind::invalid_argument, "max_retries must be >= 0");
    if (!(backoff_initial_s >= 0.0) || !(backoff_multiplier >= 1.0))
        throw Error(ErrorKind::invalid_argument, "backoff must be >= 0 with multiplier >= 1");
    if (max_in_flight < 1) throw Error(ErrorKind::invalid_argument, "max_in_flight must be >= 1");
}

void InpaintRequest::check() const {
    if (image.width < 1 || image.height < 1) throw Error(ErrorKind::invalid_argument, "inpaint image is empty");
    if (region.width() != image.width || region.height() != image.height || context.width != image.width ||
        context.height != image.height)
        throw Error(ErrorKind::dimension_mismatch, "inpaint image, region and context sizes differ");
    if (prompt.empty()) throw Error(ErrorKind::invalid_argument, "inpaint prompt is empty");
}

RgbImage composite_inside(const RgbImage& input, const RgbImage& generated, const BinaryMask& region) {
    RgbImage out = input;
    for (int y = 0; y < input.height; ++y)
        for (int x = 0; x < input.width; ++x)
            if (region.at(x, y))
                for (int c = 0; c < 3; ++c) out.at(x, y, c) = generated.at(x, y, c);
    return out;
}

std::vector<std::string> ModelService::describe_objects(const RgbImage& image, const std::string& instruction) {
    if (image.width < 1 || image.height < 1) throw Error(ErrorKind::invalid_argument, "describe_objects: empty image");
    if (instruction.empty()) throw Error(ErrorKind::invalid_argument, "describe_objects: empty instruction");
    auto out = do_describe(image, instruction);
    if (out.empty()) throw Error(ErrorKind::service_protocol, "describe_objects: empty response");
    for (const auto& d : out)
        if (d.empty()) throw Error(ErrorKind::service_protocol, "describe_objects: empty descriptor in response");
    return out;
}

BinaryMask ModelService::segment(const RgbImage& image, const std::string& descriptor) {
    if (descriptor.empty()) throw Error(ErrorKind::invalid_argument, "segment: empty descriptor");
    BinaryMask m = do_segment(image, descriptor);
    if (m.width() != image.width || m.height() != image.height)
        throw Error(ErrorKind::service_protocol,
                    fmt::format("segment: mask is {}x{}, image is {}x{}", m.width(), m.height(), image.width, image.height));
    if (m.empty()) throw Error(ErrorKind::no_match, fmt::format("segment: nothing matches '{}'", descriptor));
    return m;
}

std::string ModelService::resample_description(const std::string& descriptor, std::uint64_t seed) {
    if (descriptor.empty()) throw Error(ErrorKind::invalid_argument, "resample_description: empty descriptor");
    auto out = do_resample(descriptor, seed);
    if (out.empty()) throw Error(ErrorKind::service_protocol, "resample_description: empty response");
    return out;
}

RgbImage ModelService::inpaint(const InpaintRequest& req) {
    req.check();
    if (req.region.empty()) return req.image;
    // Context travels as 8-bit PNG; every backend sees the same quantized values.
    InpaintRequest q = req;
    for (double& v : q.context.values) v = std::lround(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
    RgbImage generated = do_inpaint(q);
    if (generated.width != req.image.width || generated.height != req.image.height)
        throw Error(ErrorKind::dimension_mismatch, "inpaint: service changed the image size");
    return composite_inside(req.image, generated, req.region);
}

std::uint64_t image_hash(const RgbImage& image) {
    const int dims[2] = {image.width, image.height};
    return fnv1a(image.data.data(), image.data.size(), fnv1a(dims, sizeof dims));
}

MockTables MockTables::defaults() {
    MockTables t;
    t.descriptors_by_instruction = {
        {"Use the brush to sweep the snack package.", {"brush", "snack package"}},
        {"Close the drawer.", {"drawer"}},
    };
    t.variants = {
        {"brush",
         {"blue plastic hand brush", "red dustpan brush", "wooden scrub brush", "green broom head",
          "black bristle paint brush", "yellow cleaning brush"}},
        {"package",
         {"bag of potato chips", "granola bar wrapper", "small cookie box", "candy bag", "cracker packet",
          "pretzel bag"}},
        {"drawer",
         {"white plastic drawer", "transparent acrylic drawer", "oak wooden drawer", "grey metal drawer"}},
        {"towel", {"striped kitchen towel", "blue microfiber cloth", "white hand towel"}},
        {"trowel", {"steel garden trowel", "red plastic scoop", "wooden spatula"}},
        {"usb", {"black usb stick", "white usb charger", "red usb drive"}},
    };
    return t;
}

void MockTables::add_dataset(const DatasetStore& store) {
    for (const auto& id : store.record_ids()) {
        const SceneRecord r = store.load_record(id);
        const RgbImage rgb = store.load_rgb(r);
        const auto key = image_hash(rgb);
        auto& list = descriptors_by_image[key];
        list.clear();
        for (std::size_t i = 0; i < r.objects.size(); ++i) {
            list.push_back(r.objects[i].descriptor);
            if (auto m = store.load_mask(r, i)) masks[{key, r.objects[i].descriptor}] = std::move(*m);
        }
    }
}

std::vector<std::string> MockModelService::do_describe(const RgbImage& image, const std::string& instruction) {
    if (auto it = tables_.descriptors_by_image.find(image_hash(image)); it != tables_.descriptors_by_image.end())
        return it->second;
    if (auto it = tables_.descriptors_by_instruction.find(instruction); it != tables_.descriptors_by_instruction.end())
        return it->second;
    return {};
}

BinaryMask MockModelService::do_segment(const RgbImage& image, const std::string& descriptor) {
    auto it = tables_.masks.find({image_hash(image), descriptor});
    if (it == tables_.masks.end())
        throw Error(ErrorKind::no_match, fmt::format("mock segmenter knows no '{}' in this image", descriptor));
    return it->second;
}

std::string MockModelService::do_resample(const std::string& descriptor, std::uint64_t seed) {
    for (const auto& [keyword, list] : tables_.variants)
        if (descriptor.find(keyword) != std::string::npos) return list[seed % list.size()];
    static const char* kColors[] = {"red", "blue", "green", "yellow", "black", "white"};
    return fmt::format("{} {}", kColors[seed % std::size(kColors)], descriptor);
}

RgbImage MockModelService::do_inpaint(const InpaintRequest& req) {
    if (pass_through_) return req.image;
    const std::uint64_t base = derive_seed({req.seed, fnv1a(req.prompt.data(), req.prompt.size())});
    const int color[3] = {static_cast<int>(40 + (base & 0xff) % 176), static_cast<int>(40 + ((base >> 8) & 0xff) % 176),
                          static_cast<int>(40 + ((base >> 16) & 0xff) % 176)};
    RgbImage out = req.image;
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            if (!req.region.at(x, y)) continue;
            const std::uint64_t n = derive_seed({base, static_cast<std::uint64_t>(x), static_cast<std::uint64_t>(y)});
            const double shade = 1.0 - 0.6 * req.context.at(x, y);
            for (int c = 0; c < 3; ++c) {
                const int jitter = static_cast<int>((n >> (8 * c)) & 31) - 16;
                out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(static_cast<int>(std::lround(color[c] * shade)) + jitter, 0, 255));
            }
        }
    }
    return out;
}

}  // namespace forge
