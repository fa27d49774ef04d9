#pragma once

#include <string>

#include "json.hpp"

#include "forge/affordance.hpp"
#include "forge/geometry.hpp"
#include "forge/record.hpp"

namespace forge {

using json = nlohmann::json;

json to_json(const TransformSpec& t);
TransformSpec transform_from_json(const json& j);

json to_json(const KeypointSet& k);
KeypointSet keypoints_from_json(const json& j);

json to_json(const TaskSchema& s);
TaskSchema schema_from_json(const json& j);

json to_json(const ValidationReport& report);

// record.json document; schema_version is mandatory on read.
json to_json(const SceneRecord& r);
SceneRecord record_from_json(const json& j);

// One dataset.jsonl line.
json record_summary(const SceneRecord& r);

// Canonical text form used on disk: two-space indent, trailing newline.
std::string dump_pretty(const json& j);

}  // namespace forge
