#include "forge/record.hpp"

#include <cmath>
#include <set>

#include <fmt/format.h>

namespace forge {

ValidationReport validate_record(const SceneRecord& r, const TaskSchema& schema, const HumanRecordLookup& is_human_record) {
    ValidationReport out;
    auto add = [&out](std::string code, std::string msg) { out.push_back({std::move(code), std::move(msg)}); };

    if (r.record_id.empty()) add("record", "record_id is empty");
    if (r.task_id != schema.task_id)
        add("schema", fmt::format("record task '{}' validated against schema '{}'", r.task_id, schema.task_id));
    if (schema.required_roles.empty() || !schema.required_roles.count(KeypointRole::target))
        add("schema", fmt::format("schema '{}' is malformed: target must be required", schema.task_id));
    if (r.width < 1 || r.height < 1) add("record", fmt::format("invalid image size {}x{}", r.width, r.height));
    if (r.instruction.empty()) add("record", "instruction is empty");
    if (r.objects.empty()) add("object_reference", "record has no objects");

    for (std::size_t i = 0; i < r.objects.size(); ++i)
        if (r.objects[i].descriptor.empty()) add("descriptor", fmt::format("object {} has an empty descriptor", i));

    const auto present = r.keypoints.roles();
    for (auto role : schema.required_roles)
        if (!present.count(role)) add("role_set", fmt::format("required role '{}' is missing", to_string(role)));
    for (auto role : present)
        if (!schema.required_roles.count(role))
            add("role_set", fmt::format("role '{}' is not part of schema '{}'", to_string(role), schema.task_id));

    for (const auto& [role, kp] : r.keypoints) {
        const auto& p = kp.point;
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            add("bounds", fmt::format("role '{}' has a non-finite coordinate", to_string(role)));
        } else if (r.width >= 1 && r.height >= 1 && !in_bounds(p, r.width, r.height)) {
            add("bounds", fmt::format("role '{}' at ({}, {}) outside {}x{} image", to_string(role), p.x, p.y, r.width,
                                      r.height));
        }
        if (kp.object_index < 0 || static_cast<std::size_t>(kp.object_index) >= r.objects.size())
            add("object_reference", fmt::format("role '{}' references object {} but the record has {} objects",
                                                to_string(role), kp.object_index, r.objects.size()));
    }

    if (const auto* syn = r.synthetic()) {
        if (syn->parent_id.empty()) {
            add("provenance", "synthetic record without parent_id");
        } else if (syn->parent_id == r.record_id) {
            add("provenance", "synthetic record names itself as parent");
        } else if (is_human_record && !is_human_record(syn->parent_id)) {
            add("provenance", fmt::format("parent '{}' is not an existing human record", syn->parent_id));
        }
        std::set<int> seen;
        for (const auto& o : syn->objects) {
            if (o.object_index < 0 || static_cast<std::size_t>(o.object_index) >= r.objects.size())
                add("provenance", fmt::format("transform recorded for missing object {}", o.object_index));
            else if (!seen.insert(o.object_index).second)
                add("provenance", fmt::format("object {} has two recorded transforms", o.object_index));
        }
    }
    return out;
}

}  // namespace forge
