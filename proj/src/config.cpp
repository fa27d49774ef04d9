#include "forge/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include <fmt/format.h>

#include "forge/error.hpp"
#include "forge/png_io.hpp"

namespace forge {

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    std::map<std::string, Config::Value> run() {
        std::map<std::string, Config::Value> out;
        std::string section;
        while (pos_ < text_.size()) {
            skip_blank();
            if (pos_ >= text_.size()) break;
            const char c = text_[pos_];
            if (c == '\n') {
                ++pos_;
                continue;
            }
            if (c == '#') {
                skip_line();
                continue;
            }
            if (c == '[') {
                ++pos_;
                section = read_key();
                skip_blank();
                expect(']');
                end_line();
                continue;
            }
            const std::size_t key_start = pos_;
            std::string key = read_key();
            if (!section.empty()) key = section + "." + key;
            skip_blank();
            expect('=');
            skip_blank();
            Config::Value v = read_value();
            end_line();
            if (!out.emplace(key, std::move(v)).second)
                throw ParseError(ErrorKind::duplicate_role, fmt::format("key '{}' given twice", key),
                                 {key_start, key.size()});
        }
        return out;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg, std::size_t len = 1) const {
        throw ParseError(ErrorKind::unparseable, fmt::format("config: {} at offset {}", msg, pos_), {pos_, len});
    }
    void skip_blank() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r')) ++pos_;
    }
    void skip_line() {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
    }
    void expect(char c) {
        if (pos_ >= text_.size() || text_[pos_] != c) fail(fmt::format("expected '{}'", c));
        ++pos_;
    }
    void end_line() {
        skip_blank();
        if (pos_ < text_.size() && text_[pos_] == '#') skip_line();
        if (pos_ < text_.size() && text_[pos_] != '\n') fail("unexpected trailing text");
    }
    std::string read_key() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' || text_[pos_] == '-' ||
                text_[pos_] == '.'))
            ++pos_;
        if (pos_ == start) fail("expected a key");
        return std::string(text_.substr(start, pos_ - start));
    }
    Config::Value read_value() {
        if (pos_ < text_.size() && text_[pos_] == '[') {
            ++pos_;
            std::vector<Config::Scalar> items;
            for (;;) {
                skip_blank();
                if (pos_ < text_.size() && text_[pos_] == ']') {
                    ++pos_;
                    return items;
                }
                items.push_back(read_scalar());
                skip_blank();
                if (pos_ < text_.size() && text_[pos_] == ',') {
                    ++pos_;
                    continue;
                }
                expect(']');
                return items;
            }
        }
        return read_scalar();
    }
    Config::Scalar read_scalar() {
        if (pos_ >= text_.size()) fail("expected a value");
        if (text_[pos_] == '"') return read_string();
        const std::size_t start = pos_;
        while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) && text_[pos_] != ',' &&
               text_[pos_] != ']' && text_[pos_] != '#')
            ++pos_;
        const std::string_view tok = text_.substr(start, pos_ - start);
        if (tok == "true") return true;
        if (tok == "false") return false;
        std::int64_t i = 0;
        auto [pi, ei] = std::from_chars(tok.data(), tok.data() + tok.size(), i);
        if (ei == std::errc() && pi == tok.data() + tok.size() && !tok.empty()) return i;
        double d = 0.0;
        auto [pd, ed] = std::from_chars(tok.data(), tok.data() + tok.size(), d);
        if (ed == std::errc() && pd == tok.data() + tok.size() && !tok.empty()) return d;
        pos_ = start;
        fail(fmt::format("cannot read value '{}'", tok), tok.size());
    }
    std::string read_string() {
        ++pos_;
        std::string out;
        while (pos_ < text_.size() && text_[pos_] != '"') {
            char c = text_[pos_++];
            if (c == '\n') fail("newline in string");
            if (c == '\\') {
                if (pos_ >= text_.size()) fail("dangling escape");
                const char e = text_[pos_++];
                switch (e) {
                    case 'n': c = '\n'; break;
                    case 't': c = '\t'; break;
                    case '"': c = '"'; break;
                    case '\\': c = '\\'; break;
                    default: fail(fmt::format("unknown escape '\\{}'", e));
                }
            }
            out += c;
        }
        expect('"');
        return out;
    }
};

const Config::Scalar* scalar_of(const std::map<std::string, Config::Value>& m, const std::string& key) {
    auto it = m.find(key);
    if (it == m.end()) return nullptr;
    const auto* s = std::get_if<Config::Scalar>(&it->second);
    if (!s) throw Error(ErrorKind::invalid_argument, fmt::format("config key '{}' must not be an array", key));
    return s;
}

[[noreturn]] void wrong_type(const std::string& key, const char* want) {
    throw Error(ErrorKind::invalid_argument, fmt::format("config key '{}' must be {}", key, want));
}

}  // namespace

Config Config::parse(std::string_view text) {
    Config c;
    c.values_ = Parser(text).run();
    return c;
}

Config Config::load(const std::filesystem::path& path) {
    const auto bytes = png::read_file(path);
    return parse(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::vector<std::string> Config::keys() const {
    std::vector<std::string> out;
    for (const auto& [k, _] : values_) out.push_back(k);
    return out;
}

std::optional<std::string> Config::get_string(const std::string& key) const {
    const Scalar* s = scalar_of(values_, key);
    if (!s) return std::nullopt;
    if (const auto* v = std::get_if<std::string>(s)) return *v;
    wrong_type(key, "a string");
}

std::optional<std::int64_t> Config::get_int(const std::string& key) const {
    const Scalar* s = scalar_of(values_, key);
    if (!s) return std::nullopt;
    if (const auto* v = std::get_if<std::int64_t>(s)) return *v;
    wrong_type(key, "an integer");
}

std::optional<double> Config::get_double(const std::string& key) const {
    const Scalar* s = scalar_of(values_, key);
    if (!s) return std::nullopt;
    if (const auto* v = std::get_if<double>(s)) return *v;
    if (const auto* v = std::get_if<std::int64_t>(s)) return static_cast<double>(*v);
    wrong_type(key, "a number");
}

std::optional<bool> Config::get_bool(const std::string& key) const {
    const Scalar* s = scalar_of(values_, key);
    if (!s) return std::nullopt;
    if (const auto* v = std::get_if<bool>(s)) return *v;
    wrong_type(key, "true or false");
}

std::optional<std::vector<std::string>> Config::get_strings(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    const auto* arr = std::get_if<std::vector<Scalar>>(&it->second);
    if (!arr) wrong_type(key, "an array of strings");
    std::vector<std::string> out;
    for (const auto& s : *arr) {
        const auto* v = std::get_if<std::string>(&s);
        if (!v) wrong_type(key, "an array of strings");
        out.push_back(*v);
    }
    return out;
}

std::optional<std::vector<double>> Config::get_doubles(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    const auto* arr = std::get_if<std::vector<Scalar>>(&it->second);
    if (!arr) wrong_type(key, "an array of numbers");
    std::vector<double> out;
    for (const auto& s : *arr) {
        if (const auto* d = std::get_if<double>(&s)) out.push_back(*d);
        else if (const auto* i = std::get_if<std::int64_t>(&s)) out.push_back(static_cast<double>(*i));
        else wrong_type(key, "an array of numbers");
    }
    return out;
}

void Config::require_known(const std::string& section, const std::vector<std::string>& known) const {
    const std::string prefix = section + ".";
    for (const auto& [k, _] : values_) {
        if (k.compare(0, prefix.size(), prefix) != 0) continue;
        const std::string leaf = k.substr(prefix.size());
        if (std::find(known.begin(), known.end(), leaf) == known.end())
            throw Error(ErrorKind::invalid_argument, fmt::format("unknown config key '{}'", k));
    }
}

void apply_transform(const Config& c, TransformConfig& t) {
    c.require_known("transform", {"scale_min", "scale_max", "rotation_max_deg", "translation_frac",
                                  "elastic_alpha_max", "elastic_grid", "elastic_sigma"});
    if (auto v = c.get_double("transform.scale_min")) t.scale_min = *v;
    if (auto v = c.get_double("transform.scale_max")) t.scale_max = *v;
    if (auto v = c.get_double("transform.rotation_max_deg")) t.rotation_max = *v * M_PI / 180.0;
    if (auto v = c.get_double("transform.translation_frac")) t.translation_frac = *v;
    if (auto v = c.get_double("transform.elastic_alpha_max")) t.elastic_alpha_max = *v;
    if (auto v = c.get_int("transform.elastic_grid")) t.elastic_grid = static_cast<int>(*v);
    if (auto v = c.get_double("transform.elastic_sigma")) t.elastic_sigma = *v;
    t.check();
}

void apply_synthesis(const Config& c, SynthesisConfig& s) {
    c.require_known("synthesis", {"n", "seed", "context", "independent_per_object", "collision_margin",
                                  "max_placement_retries", "failure_budget", "workers", "inpaint_strength",
                                  "inpaint_guidance", "id_prefix"});
    apply_transform(c, s.transform);
    if (auto v = c.get_int("synthesis.n")) s.target_size = static_cast<std::size_t>(*v);
    if (auto v = c.get_int("synthesis.seed")) s.master_seed = static_cast<std::uint64_t>(*v);
    if (auto v = c.get_string("synthesis.context")) s.context_kind = context_kind_from_string(*v);
    if (auto v = c.get_bool("synthesis.independent_per_object")) s.independent_per_object = *v;
    if (auto v = c.get_int("synthesis.collision_margin")) s.collision_margin = static_cast<int>(*v);
    if (auto v = c.get_int("synthesis.max_placement_retries")) s.max_placement_retries = static_cast<int>(*v);
    if (auto v = c.get_double("synthesis.failure_budget")) s.failure_budget = *v;
    if (auto v = c.get_int("synthesis.workers")) s.workers = static_cast<int>(*v);
    if (auto v = c.get_double("synthesis.inpaint_strength")) s.inpaint_strength = *v;
    if (auto v = c.get_double("synthesis.inpaint_guidance")) s.inpaint_guidance = *v;
    if (auto v = c.get_string("synthesis.id_prefix")) s.id_prefix = *v;
    s.check();
}

void apply_service(const Config& c, ServiceEndpoint& e) {
    c.require_known("service", {"base_url", "timeout_s", "max_retries", "backoff_initial_s", "backoff_multiplier",
                                "max_in_flight"});
    if (auto v = c.get_string("service.base_url")) e.base_url = *v;
    if (auto v = c.get_double("service.timeout_s")) e.timeout_s = *v;
    if (auto v = c.get_int("service.max_retries")) e.max_retries = static_cast<int>(*v);
    if (auto v = c.get_double("service.backoff_initial_s")) e.backoff_initial_s = *v;
    if (auto v = c.get_double("service.backoff_multiplier")) e.backoff_multiplier = *v;
    if (auto v = c.get_int("service.max_in_flight")) e.max_in_flight = static_cast<int>(*v);
    e.check();
}

void apply_plan(const Config& c, PlanConfig& p) {
    c.require_known("plan", {"clearance", "workspace_min", "workspace_max", "depth_window"});
    if (auto v = c.get_double("plan.clearance")) p.clearance = *v;
    if (auto v = c.get_int("plan.depth_window")) p.depth_window = static_cast<int>(*v);
    for (auto [key, dst] : {std::pair{"plan.workspace_min", &p.workspace_min}, {"plan.workspace_max", &p.workspace_max}}) {
        auto v = c.get_doubles(key);
        if (!v) continue;
        if (v->size() != 3) throw Error(ErrorKind::invalid_argument, fmt::format("'{}' needs 3 numbers", key));
        *dst = {(*v)[0], (*v)[1], (*v)[2]};
    }
    if (!(p.workspace_min.array() < p.workspace_max.array()).all())
        throw Error(ErrorKind::invalid_argument, "plan.workspace_min must be below plan.workspace_max");
    if (!(p.clearance >= 0.0)) throw Error(ErrorKind::invalid_argument, "plan.clearance must be >= 0");
    if (p.depth_window < 1 || p.depth_window % 2 == 0)
        throw Error(ErrorKind::invalid_argument, "plan.depth_window must be a positive odd number");
}

void apply_augmentation(const Config& c, AugmentationConfig& a) {
    c.require_known("augment", {"rotate", "rotation_max_deg", "resized_crop", "crop_scale_min", "hflip", "vflip",
                                "flip_probability", "color_jitter", "brightness", "contrast", "saturation",
                                "replicas"});
    if (auto v = c.get_bool("augment.rotate")) a.rotate = *v;
    if (auto v = c.get_double("augment.rotation_max_deg")) a.rotation_max = *v * M_PI / 180.0;
    if (auto v = c.get_bool("augment.resized_crop")) a.resized_crop = *v;
    if (auto v = c.get_double("augment.crop_scale_min")) a.crop_scale_min = *v;
    if (auto v = c.get_bool("augment.hflip")) a.hflip = *v;
    if (auto v = c.get_bool("augment.vflip")) a.vflip = *v;
    if (auto v = c.get_double("augment.flip_probability")) a.flip_probability = *v;
    if (auto v = c.get_bool("augment.color_jitter")) a.color_jitter = *v;
    if (auto v = c.get_double("augment.brightness")) a.brightness = *v;
    if (auto v = c.get_double("augment.contrast")) a.contrast = *v;
    if (auto v = c.get_double("augment.saturation")) a.saturation = *v;
    if (auto v = c.get_int("augment.replicas")) a.replicas = static_cast<int>(*v);
    a.check();
}

}  // namespace forge
