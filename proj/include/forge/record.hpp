#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "forge/affordance.hpp"
#include "forge/geometry.hpp"

namespace forge {

inline constexpr const char* kSceneSchemaVersion = "forge.scene/1";

struct ObjectEntry {
    std::string descriptor;
    std::optional<std::string> mask_ref;  // relative to the scene directory

    friend bool operator==(const ObjectEntry&, const ObjectEntry&) = default;
};

struct HumanProvenance {
    friend bool operator==(const HumanProvenance&, const HumanProvenance&) = default;
};

// Everything needed to regenerate one object's step of a synthetic record.
struct ObjectSynthesis {
    int object_index = 0;
    std::string source_descriptor;
    std::string prompt;  // the resampled description the inpainter saw
    TransformSpec transform;
    std::uint64_t transform_seed = 0;
    int placement_attempts = 0;
    bool identity_fallback = false;

    friend bool operator==(const ObjectSynthesis&, const ObjectSynthesis&) = default;
};

struct SyntheticProvenance {
    std::string parent_id;
    std::uint64_t record_seed = 0;
    std::uint64_t inpaint_seed = 0;
    ContextKind context_kind = ContextKind::soft_edge;
    std::vector<ObjectSynthesis> objects;

    friend bool operator==(const SyntheticProvenance&, const SyntheticProvenance&) = default;
};

using Provenance = std::variant<HumanProvenance, SyntheticProvenance>;

struct SceneRecord {
    std::string record_id;
    std::string task_id;
    std::string object_set;  // tag used by holdout splits
    int width = 0;
    int height = 0;
    std::string rgb_ref = "rgb.png";
    std::optional<std::string> depth_ref;
    std::string instruction;
    std::vector<ObjectEntry> objects;
    KeypointSet keypoints;
    Provenance provenance = HumanProvenance{};
    // Optimistic-concurrency token, bumped by every store write.
    std::int64_t version = 1;

    bool is_synthetic() const { return std::holds_alternative<SyntheticProvenance>(provenance); }
    const SyntheticProvenance* synthetic() const { return std::get_if<SyntheticProvenance>(&provenance); }

    friend bool operator==(const SceneRecord&, const SceneRecord&) = default;
};

struct Violation {
    std::string code;  // bounds | role_set | object_reference | provenance | descriptor | record | schema
    std::string message;
};

using ValidationReport = std::vector<Violation>;

// Answers whether an id names an existing human record.
using HumanRecordLookup = std::function<bool(const std::string&)>;

// Lists every violated invariant; never throws on malformed data. Without a
// lookup, synthetic parent links are only checked for being non-empty.
ValidationReport validate_record(const SceneRecord& r, const TaskSchema& schema,
                                 const HumanRecordLookup& is_human_record = {});

}  // namespace forge
