#include "forge/json_io.hpp"

#include <fmt/format.h>

#include "forge/error.hpp"

namespace forge {

namespace {

json point_json(PixelPoint p) { return json{{"x", p.x}, {"y", p.y}}; }
PixelPoint point_from(const json& j) { return {j.at("x").get<double>(), j.at("y").get<double>()}; }

template <typename F>
auto guarded(const char* what, F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::io, fmt::format("malformed {}: {}", what, e.what()));
    }
}

}  // namespace

json to_json(const TransformSpec& t) {
    const auto& s = t.similarity;
    json j{{"seed", t.seed},
           {"similarity",
            {{"scale", s.scale}, {"rotation", s.rotation}, {"dx", s.dx}, {"dy", s.dy}, {"center", point_json(s.center)}}}};
    if (t.elastic) {
        const auto& e = *t.elastic;
        j["elastic"] = {{"grid_cols", e.grid_cols},       {"grid_rows", e.grid_rows},
                        {"image_width", e.image_width},   {"image_height", e.image_height},
                        {"smoothing_sigma", e.smoothing_sigma}, {"magnitude_alpha", e.magnitude_alpha},
                        {"dx", e.dx},                     {"dy", e.dy}};
    } else {
        j["elastic"] = nullptr;
    }
    return j;
}

TransformSpec transform_from_json(const json& j) {
    return guarded("transform spec", [&] {
        TransformSpec t;
        t.seed = j.at("seed").get<std::uint64_t>();
        const auto& s = j.at("similarity");
        t.similarity = {s.at("scale").get<double>(), s.at("rotation").get<double>(), s.at("dx").get<double>(),
                        s.at("dy").get<double>(), point_from(s.at("center"))};
        if (j.contains("elastic") && !j.at("elastic").is_null()) {
            const auto& e = j.at("elastic");
            ElasticParams p;
            p.grid_cols = e.at("grid_cols").get<int>();
            p.grid_rows = e.at("grid_rows").get<int>();
            p.image_width = e.at("image_width").get<int>();
            p.image_height = e.at("image_height").get<int>();
            p.smoothing_sigma = e.at("smoothing_sigma").get<double>();
            p.magnitude_alpha = e.at("magnitude_alpha").get<double>();
            p.dx = e.at("dx").get<std::vector<double>>();
            p.dy = e.at("dy").get<std::vector<double>>();
            const auto n = static_cast<std::size_t>(p.grid_cols) * p.grid_rows;
            if (p.grid_cols < 2 || p.grid_rows < 2 || p.dx.size() != n || p.dy.size() != n)
                throw Error(ErrorKind::io, "elastic field size does not match its grid");
            t.elastic = std::move(p);
        }
        return t;
    });
}

json to_json(const KeypointSet& k) {
    json j = json::object();
    for (const auto& [role, kp] : k)
        j[std::string(to_string(role))] = {{"x", kp.point.x}, {"y", kp.point.y}, {"object_index", kp.object_index}};
    return j;
}

KeypointSet keypoints_from_json(const json& j) {
    return guarded("keypoints", [&] {
        if (!j.is_object()) throw Error(ErrorKind::io, "keypoints must be an object keyed by role");
        KeypointSet k;
        for (const auto& [name, v] : j.items()) {
            auto role = role_from_string(name);
            if (!role) throw Error(ErrorKind::io, fmt::format("unknown keypoint role '{}'", name));
            k.add(*role, {point_from(v), v.value("object_index", 0)});
        }
        return k;
    });
}

namespace {
json roles_json(const std::set<KeypointRole>& roles) {
    json a = json::array();
    for (auto r : kAllRoles)
        if (roles.count(r)) a.push_back(std::string(to_string(r)));
    return a;
}
}  // namespace

json to_json(const TaskSchema& s) {
    json height = s.gripper_height.kind == HeightMode::Kind::fixed
                      ? json{{"mode", "fixed"}, {"z", s.gripper_height.meters}}
                      : json{{"mode", "from_depth_offset"}, {"offset", s.gripper_height.meters}};
    json orient = s.gripper_orientation.kind == OrientationMode::Kind::top_down_fixed_yaw
                      ? json{{"mode", "top_down_fixed_yaw"}, {"yaw", s.gripper_orientation.yaw}}
                      : json{{"mode", "yaw_from_grasp_to_function"}, {"yaw_offset", s.gripper_orientation.yaw}};
    return {{"task_id", s.task_id},
            {"instruction_template", s.instruction_template},
            {"required_roles", roles_json(s.required_roles)},
            {"gripper_height", height},
            {"gripper_orientation", orient}};
}

TaskSchema schema_from_json(const json& j) {
    auto s = guarded("task schema", [&] {
        TaskSchema s;
        s.task_id = j.at("task_id").get<std::string>();
        s.instruction_template = j.value("instruction_template", std::string{});
        for (const auto& r : j.at("required_roles")) {
            auto role = role_from_string(r.get<std::string>());
            if (!role) throw Error(ErrorKind::io, fmt::format("unknown role '{}'", r.get<std::string>()));
            s.required_roles.insert(*role);
        }
        const auto& h = j.at("gripper_height");
        if (h.at("mode") == "fixed") s.gripper_height = HeightMode::fixed_z(h.at("z").get<double>());
        else s.gripper_height = HeightMode::offset(h.value("offset", 0.0));
        const auto& o = j.at("gripper_orientation");
        if (o.at("mode") == "yaw_from_grasp_to_function")
            s.gripper_orientation = OrientationMode::grasp_to_function(o.value("yaw_offset", 0.0));
        else s.gripper_orientation = OrientationMode::fixed_yaw(o.value("yaw", 0.0));
        return s;
    });
    s.check();
    return s;
}

json to_json(const ValidationReport& report) {
    json a = json::array();
    for (const auto& v : report) a.push_back({{"code", v.code}, {"message", v.message}});
    return a;
}

json to_json(const SceneRecord& r) {
    json objects = json::array();
    for (const auto& o : r.objects) {
        json e{{"descriptor", o.descriptor}};
        e["mask_ref"] = o.mask_ref ? json(*o.mask_ref) : json(nullptr);
        objects.push_back(std::move(e));
    }
    json prov;
    if (const auto* syn = r.synthetic()) {
        json objs = json::array();
        for (const auto& o : syn->objects)
            objs.push_back({{"object_index", o.object_index},
                            {"source_descriptor", o.source_descriptor},
                            {"prompt", o.prompt},
                            {"transform", to_json(o.transform)},
                            {"transform_seed", o.transform_seed},
                            {"placement_attempts", o.placement_attempts},
                            {"identity_fallback", o.identity_fallback}});
        prov = {{"kind", "synthetic"},
                {"parent_id", syn->parent_id},
                {"record_seed", syn->record_seed},
                {"inpaint_seed", syn->inpaint_seed},
                {"context_kind", to_string(syn->context_kind)},
                {"objects", objs}};
    } else {
        prov = {{"kind", "human"}};
    }
    return {{"schema_version", kSceneSchemaVersion},
            {"record_id", r.record_id},
            {"task_id", r.task_id},
            {"object_set", r.object_set},
            {"width", r.width},
            {"height", r.height},
            {"rgb_ref", r.rgb_ref},
            {"depth_ref", r.depth_ref ? json(*r.depth_ref) : json(nullptr)},
            {"instruction", r.instruction},
            {"objects", objects},
            {"keypoints", to_json(r.keypoints)},
            {"provenance", prov},
            {"version", r.version}};
}

SceneRecord record_from_json(const json& j) {
    return guarded("scene record", [&] {
        if (!j.contains("schema_version")) throw Error(ErrorKind::io, "record.json lacks schema_version");
        if (j.at("schema_version") != kSceneSchemaVersion)
            throw Error(ErrorKind::io, fmt::format("unsupported schema_version {}", j.at("schema_version").dump()));
        SceneRecord r;
        r.record_id = j.at("record_id").get<std::string>();
        r.task_id = j.at("task_id").get<std::string>();
        r.object_set = j.value("object_set", std::string{});
        r.width = j.at("width").get<int>();
        r.height = j.at("height").get<int>();
        r.rgb_ref = j.at("rgb_ref").get<std::string>();
        if (j.contains("depth_ref") && !j.at("depth_ref").is_null()) r.depth_ref = j.at("depth_ref").get<std::string>();
        r.instruction = j.at("instruction").get<std::string>();
        for (const auto& o : j.at("objects")) {
            ObjectEntry e{o.at("descriptor").get<std::string>(), std::nullopt};
            if (o.contains("mask_ref") && !o.at("mask_ref").is_null()) e.mask_ref = o.at("mask_ref").get<std::string>();
            r.objects.push_back(std::move(e));
        }
        r.keypoints = keypoints_from_json(j.at("keypoints"));
        const auto& p = j.at("provenance");
        if (p.at("kind") == "synthetic") {
            SyntheticProvenance syn;
            syn.parent_id = p.at("parent_id").get<std::string>();
            syn.record_seed = p.value("record_seed", std::uint64_t{0});
            syn.inpaint_seed = p.at("inpaint_seed").get<std::uint64_t>();
            syn.context_kind = context_kind_from_string(p.value("context_kind", std::string("soft_edge")));
            for (const auto& o : p.at("objects"))
                syn.objects.push_back({o.at("object_index").get<int>(), o.value("source_descriptor", std::string{}),
                                       o.at("prompt").get<std::string>(), transform_from_json(o.at("transform")),
                                       o.value("transform_seed", std::uint64_t{0}), o.value("placement_attempts", 0),
                                       o.value("identity_fallback", false)});
            r.provenance = std::move(syn);
        } else if (p.at("kind") == "human") {
            r.provenance = HumanProvenance{};
        } else {
            throw Error(ErrorKind::io, "provenance.kind must be human or synthetic");
        }
        r.version = j.value("version", std::int64_t{1});
        return r;
    });
}

json record_summary(const SceneRecord& r) {
    json j{{"record_id", r.record_id},
           {"task_id", r.task_id},
           {"object_set", r.object_set},
           {"origin", r.is_synthetic() ? "synthetic" : "human"},
           {"width", r.width},
           {"height", r.height},
           {"num_objects", r.objects.size()},
           {"roles", json::array()}};
    for (const auto& [role, _] : r.keypoints) j["roles"].push_back(std::string(to_string(role)));
    j["parent_id"] = r.synthetic() ? json(r.synthetic()->parent_id) : json(nullptr);
    return j;
}

std::string dump_pretty(const json& j) { return j.dump(2) + "\n"; }

}  // namespace forge
