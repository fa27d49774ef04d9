#pragma once

#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "forge/affordance.hpp"
#include "forge/image.hpp"
#include "forge/json_io.hpp"

namespace forge {

struct CameraModel {
    double fx = 600.0;
    double fy = 600.0;
    double cx = 320.0;
    double cy = 240.0;
    // camera -> base
    Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    void check() const;
};

json to_json(const CameraModel& cam);
CameraModel camera_from_json(const json& j);

// Median of the valid (finite, > 0) depths in a window x window box centered
// on the pixel containing p. Throws missing_depth when the box has none.
double read_depth(const DepthImage& depth, PixelPoint p, int window = 5);

// Pinhole back-projection, then camera_to_base.
Eigen::Vector3d deproject(PixelPoint p, double depth_m, const CameraModel& cam);

enum class Gripper { open, closed };
enum class Phase { grasp, manipulation };
enum class WaypointLabel { approach, grasp, lift, pre_contact, contact, post_contact, retreat };

const char* to_string(Gripper g);
const char* to_string(Phase p);
const char* to_string(WaypointLabel l);

struct Waypoint {
    Eigen::Vector3d position;
    Eigen::Quaterniond orientation;
    Gripper gripper = Gripper::open;
    Phase phase = Phase::manipulation;
    WaypointLabel label = WaypointLabel::contact;
};

struct MotionPlan {
    std::vector<Waypoint> waypoints;
};

struct PlanConfig {
    double clearance = 0.10;  // meters above grasp / post-contact
    Eigen::Vector3d workspace_min{-1.0, -1.0, -0.5};
    Eigen::Vector3d workspace_max{1.0, 1.0, 1.5};
    int depth_window = 5;
};

// Gripper pointing straight down (base z up) rotated by yaw about base z.
// yaw 0 gives (w, x, y, z) = (0, 1, 0, 0).
Eigen::Quaterniond top_down_orientation(double yaw);
double yaw_of(const Eigen::Quaterniond& top_down);

// Grasp phase (approach, grasp, lift) when the schema has a grasp point, then
// the manipulation phase (pre_contact, contact at the target, post_contact,
// retreat). Without a grasp point the gripper stays closed throughout.
MotionPlan plan_motion(const KeypointSet& k, const DepthImage& depth, const CameraModel& cam, const TaskSchema& schema,
                       const PlanConfig& cfg = {});

// Phase order, label order, gripper transitions, finiteness. Empty when valid.
std::vector<std::string> validate_plan(const MotionPlan& plan);

json to_json(const MotionPlan& plan);
std::string plan_table(const MotionPlan& plan);

}  // namespace forge
