#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "forge/gateway.hpp"
#include "forge/motion.hpp"
#include "forge/synthesis.hpp"
#include "forge/vlm_dataset.hpp"

namespace forge {

// TOML-style configuration: `[section]` headers, `key = value` lines and `#`
// comments. Values are strings, integers, floats, booleans or flat arrays of
// those. Keys are addressed as "section.key".
class Config {
public:
    using Scalar = std::variant<std::string, std::int64_t, double, bool>;
    using Value = std::variant<Scalar, std::vector<Scalar>>;

    static Config parse(std::string_view text);
    static Config load(const std::filesystem::path& path);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    std::vector<std::string> keys() const;

    std::optional<std::string> get_string(const std::string& key) const;
    std::optional<std::int64_t> get_int(const std::string& key) const;
    std::optional<double> get_double(const std::string& key) const;  // integers widen
    std::optional<bool> get_bool(const std::string& key) const;
    std::optional<std::vector<std::string>> get_strings(const std::string& key) const;
    std::optional<std::vector<double>> get_doubles(const std::string& key) const;

    // Throws invalid_argument naming the first key under `section` not in `known`.
    void require_known(const std::string& section, const std::vector<std::string>& known) const;

private:
    std::map<std::string, Value> values_;
};

// Each applies the keys of one section over the given defaults.
void apply_transform(const Config& c, TransformConfig& t);         // [transform]
void apply_synthesis(const Config& c, SynthesisConfig& s);         // [synthesis] and [transform]
void apply_service(const Config& c, ServiceEndpoint& e);           // [service]
void apply_plan(const Config& c, PlanConfig& p);                   // [plan]
void apply_augmentation(const Config& c, AugmentationConfig& a);   // [augment]

}  // namespace forge
