#include "forge/motion.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "forge/error.hpp"

namespace forge {

void CameraModel::check() const {
    if (!(fx > 0.0) || !(fy > 0.0)) throw Error(ErrorKind::invalid_argument, "camera focal lengths must be > 0");
    if (std::abs(rotation.norm() - 1.0) > 1e-9) throw Error(ErrorKind::invalid_argument, "camera rotation is not a unit quaternion");
}

json to_json(const CameraModel& cam) {
    const auto& q = cam.rotation;
    return {{"fx", cam.fx}, {"fy", cam.fy}, {"cx", cam.cx}, {"cy", cam.cy},
            {"rotation_wxyz", {q.w(), q.x(), q.y(), q.z()}},
            {"translation", {cam.translation.x(), cam.translation.y(), cam.translation.z()}}};
}

CameraModel camera_from_json(const json& j) {
    CameraModel cam;
    try {
        cam.fx = j.at("fx").get<double>();
        cam.fy = j.at("fy").get<double>();
        cam.cx = j.at("cx").get<double>();
        cam.cy = j.at("cy").get<double>();
        if (j.contains("rotation_wxyz")) {
            const auto q = j.at("rotation_wxyz").get<std::vector<double>>();
            if (q.size() != 4) throw Error(ErrorKind::invalid_argument, "rotation_wxyz needs 4 numbers");
            cam.rotation = Eigen::Quaterniond(q[0], q[1], q[2], q[3]);
        }
        if (j.contains("translation")) {
            const auto t = j.at("translation").get<std::vector<double>>();
            if (t.size() != 3) throw Error(ErrorKind::invalid_argument, "translation needs 3 numbers");
            cam.translation = {t[0], t[1], t[2]};
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::invalid_argument, fmt::format("malformed camera: {}", e.what()));
    }
    cam.check();
    return cam;
}

double read_depth(const DepthImage& depth, PixelPoint p, int window) {
    if (depth.width == 0 || depth.height == 0) throw Error(ErrorKind::missing_depth, "no depth image");
    const int px = static_cast<int>(std::floor(p.x)), py = static_cast<int>(std::floor(p.y));
    const int r = window / 2;
    std::vector<double> vals;
    for (int y = py - r; y <= py + r; ++y)
        for (int x = px - r; x <= px + r; ++x) {
            if (x < 0 || y < 0 || x >= depth.width || y >= depth.height) continue;
            const float d = depth.at(x, y);
            if (std::isfinite(d) && d > 0.0f) vals.push_back(d);
        }
    if (vals.empty()) throw Error(ErrorKind::missing_depth, fmt::format("no valid depth around ({}, {})", p.x, p.y));
    std::sort(vals.begin(), vals.end());
    const std::size_t n = vals.size();
    return n % 2 ? vals[n / 2] : 0.5 * (vals[n / 2 - 1] + vals[n / 2]);
}

Eigen::Vector3d deproject(PixelPoint p, double depth_m, const CameraModel& cam) {
    if (!(depth_m > 0.0) || !std::isfinite(depth_m)) throw Error(ErrorKind::missing_depth, "depth must be finite and > 0");
    const Eigen::Vector3d in_camera((p.x - cam.cx) / cam.fx * depth_m, (p.y - cam.cy) / cam.fy * depth_m, depth_m);
    return cam.rotation * in_camera + cam.translation;
}

const char* to_string(Gripper g) { return g == Gripper::open ? "open" : "closed"; }
const char* to_string(Phase p) { return p == Phase::grasp ? "grasp" : "manipulation"; }
const char* to_string(WaypointLabel l) {
    switch (l) {
        case WaypointLabel::approach: return "approach";
        case WaypointLabel::grasp: return "grasp";
        case WaypointLabel::lift: return "lift";
        case WaypointLabel::pre_contact: return "pre_contact";
        case WaypointLabel::contact: return "contact";
        case WaypointLabel::post_contact: return "post_contact";
        case WaypointLabel::retreat: return "retreat";
    }
    return "contact";
}

Eigen::Quaterniond top_down_orientation(double yaw) {
    // Rz(yaw) * Rx(pi), written out so yaw 0 is exact.
    return Eigen::Quaterniond(0.0, std::cos(yaw / 2.0), std::sin(yaw / 2.0), 0.0);
}

double yaw_of(const Eigen::Quaterniond& q) { return 2.0 * std::atan2(q.y(), q.x()); }

MotionPlan plan_motion(const KeypointSet& k, const DepthImage& depth, const CameraModel& cam, const TaskSchema& schema,
                       const PlanConfig& cfg) {
    schema.check();
    cam.check();
    if (k.roles() != schema.required_roles)
        throw Error(ErrorKind::schema_mismatch, fmt::format("keypoints do not match schema '{}'", schema.task_id));

    const Eigen::Vector3d up = Eigen::Vector3d::UnitZ();
    auto position_of = [&](KeypointRole role) {
        const PixelPoint p = k.at(role).point;
        Eigen::Vector3d pos = deproject(p, read_depth(depth, p, cfg.depth_window), cam);
        if (schema.gripper_height.kind == HeightMode::Kind::fixed) pos.z() = schema.gripper_height.meters;
        else pos += schema.gripper_height.meters * up;
        return pos;
    };

    double yaw = schema.gripper_orientation.yaw;
    if (schema.gripper_orientation.kind == OrientationMode::Kind::yaw_from_grasp_to_function &&
        k.contains(KeypointRole::grasp) && k.contains(KeypointRole::function)) {
        const PixelPoint g = k.at(KeypointRole::grasp).point, f = k.at(KeypointRole::function).point;
        yaw += std::atan2(f.y - g.y, f.x - g.x);
    }
    const Eigen::Quaterniond orient = top_down_orientation(yaw);

    MotionPlan plan;
    auto emit = [&](const Eigen::Vector3d& pos, Gripper g, Phase ph, WaypointLabel l) {
        plan.waypoints.push_back({pos, orient, g, ph, l});
    };

    const bool has_grasp = k.contains(KeypointRole::grasp);
    if (has_grasp) {
        const Eigen::Vector3d grasp = position_of(KeypointRole::grasp);
        emit(grasp + cfg.clearance * up, Gripper::open, Phase::grasp, WaypointLabel::approach);
        emit(grasp, Gripper::closed, Phase::grasp, WaypointLabel::grasp);
        emit(grasp + cfg.clearance * up, Gripper::closed, Phase::grasp, WaypointLabel::lift);
    }
    Eigen::Vector3d last = position_of(KeypointRole::target);
    if (k.contains(KeypointRole::pre_contact))
        emit(position_of(KeypointRole::pre_contact), Gripper::closed, Phase::manipulation, WaypointLabel::pre_contact);
    emit(last, Gripper::closed, Phase::manipulation, WaypointLabel::contact);
    if (k.contains(KeypointRole::post_contact)) {
        last = position_of(KeypointRole::post_contact);
        emit(last, Gripper::closed, Phase::manipulation, WaypointLabel::post_contact);
    }
    emit(last + cfg.clearance * up, has_grasp ? Gripper::open : Gripper::closed, Phase::manipulation,
         WaypointLabel::retreat);

    for (const auto& w : plan.waypoints) {
        const auto& p = w.position;
        if ((p.array() < cfg.workspace_min.array()).any() || (p.array() > cfg.workspace_max.array()).any())
            throw Error(ErrorKind::unreachable, fmt::format("{} waypoint ({:.3f}, {:.3f}, {:.3f}) is outside the workspace",
                                                            to_string(w.label), p.x(), p.y(), p.z()));
    }
    return plan;
}

std::vector<std::string> validate_plan(const MotionPlan& plan) {
    std::vector<std::string> out;
    const auto& w = plan.waypoints;
    if (w.empty()) out.push_back("plan has no waypoints");
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!w[i].position.allFinite()) out.push_back(fmt::format("waypoint {} has a non-finite position", i));
        if (!w[i].orientation.coeffs().allFinite() || std::abs(w[i].orientation.norm() - 1.0) > 1e-9)
            out.push_back(fmt::format("waypoint {} orientation is not a unit quaternion", i));
        if (i == 0) continue;
        if (w[i - 1].phase == Phase::manipulation && w[i].phase == Phase::grasp)
            out.push_back(fmt::format("grasp-phase waypoint {} follows the manipulation phase", i));
        if (static_cast<int>(w[i].label) <= static_cast<int>(w[i - 1].label))
            out.push_back(fmt::format("label {} at {} breaks the canonical order", to_string(w[i].label), i));
        if (w[i].gripper != w[i - 1].gripper && w[i].label != WaypointLabel::grasp && w[i].label != WaypointLabel::retreat)
            out.push_back(fmt::format("gripper changes at {} waypoint {}", to_string(w[i].label), i));
    }
    const bool has_grasp_phase = std::any_of(w.begin(), w.end(), [](const Waypoint& x) { return x.phase == Phase::grasp; });
    if (!has_grasp_phase && std::any_of(w.begin(), w.end(), [](const Waypoint& x) { return x.gripper == Gripper::open; }))
        out.push_back("graspless plan opens the gripper");
    return out;
}

json to_json(const MotionPlan& plan) {
    json a = json::array();
    for (const auto& w : plan.waypoints) {
        const auto& q = w.orientation;
        a.push_back({{"position", {w.position.x(), w.position.y(), w.position.z()}},
                     {"quaternion", {q.w(), q.x(), q.y(), q.z()}},
                     {"gripper", to_string(w.gripper)},
                     {"phase", to_string(w.phase)},
                     {"label", to_string(w.label)}});
    }
    return a;
}

std::string plan_table(const MotionPlan& plan) {
    std::string out = fmt::format("{:<3} {:<13} {:<13} {:<7} {:>9} {:>9} {:>9} {:>8}\n", "#", "label", "phase", "gripper",
                                  "x [m]", "y [m]", "z [m]", "yaw[deg]");
    for (std::size_t i = 0; i < plan.waypoints.size(); ++i) {
        const auto& w = plan.waypoints[i];
        out += fmt::format("{:<3} {:<13} {:<13} {:<7} {:>9.4f} {:>9.4f} {:>9.4f} {:>8.2f}\n", i, to_string(w.label),
                           to_string(w.phase), to_string(w.gripper), w.position.x(), w.position.y(), w.position.z(),
                           yaw_of(w.orientation) * 180.0 / M_PI);
    }
    return out;
}

}  // namespace forge
