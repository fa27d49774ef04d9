#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "forge/image.hpp"

namespace forge {

enum class KeypointRole { grasp, function, target, pre_contact, post_contact };

// Canonical order used by every serialization.
inline constexpr std::array<KeypointRole, 5> kAllRoles = {
    KeypointRole::grasp, KeypointRole::function, KeypointRole::target,
    KeypointRole::pre_contact, KeypointRole::post_contact};

std::string_view to_string(KeypointRole role);
std::optional<KeypointRole> role_from_string(std::string_view name);
std::size_t role_index(KeypointRole role);

struct Keypoint {
    PixelPoint point;
    int object_index = 0;

    friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

// Role-typed points; each role at most once. Iteration follows canonical order.
class KeypointSet {
public:
    using Map = std::map<KeypointRole, Keypoint>;

    // Throws duplicate_role if the role is already present.
    void add(KeypointRole role, Keypoint kp);
    void set(KeypointRole role, Keypoint kp) { entries_[role] = kp; }
    bool contains(KeypointRole role) const { return entries_.count(role) != 0; }
    const Keypoint& at(KeypointRole role) const;
    std::set<KeypointRole> roles() const;
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    Map::const_iterator begin() const { return entries_.begin(); }
    Map::const_iterator end() const { return entries_.end(); }

    friend bool operator==(const KeypointSet&, const KeypointSet&) = default;

private:
    Map entries_;
};

struct HeightMode {
    enum class Kind { from_depth_offset, fixed };
    Kind kind = Kind::from_depth_offset;
    double meters = 0.0;  // offset or absolute z

    static HeightMode offset(double m) { return {Kind::from_depth_offset, m}; }
    static HeightMode fixed_z(double z) { return {Kind::fixed, z}; }
};

struct OrientationMode {
    enum class Kind { top_down_fixed_yaw, yaw_from_grasp_to_function };
    Kind kind = Kind::top_down_fixed_yaw;
    double yaw = 0.0;  // radians; fixed yaw, or offset added to the grasp->function angle

    static OrientationMode fixed_yaw(double y) { return {Kind::top_down_fixed_yaw, y}; }
    static OrientationMode grasp_to_function(double offset = 0.0) { return {Kind::yaw_from_grasp_to_function, offset}; }
};

struct TaskSchema {
    std::string task_id;
    // Object descriptors fill "{0}", "{1}", ... in annotation order.
    std::string instruction_template;
    std::set<KeypointRole> required_roles;
    HeightMode gripper_height;
    OrientationMode gripper_orientation;

    // Checks the schema invariants; throws invalid_argument.
    void check() const;
    std::string render_instruction(const std::vector<std::string>& descriptors) const;
};

// The five table-top tasks; sweeping needs every role, drawer closing all but grasp.
const std::vector<TaskSchema>& builtin_schemas();
std::optional<TaskSchema> find_builtin_schema(std::string_view task_id);

struct NormalizedCoord {
    int nx = 0;
    int ny = 0;

    friend bool operator==(const NormalizedCoord&, const NormalizedCoord&) = default;
};

inline constexpr int kNormalizedMax = 999;

// floor(coord / dim * 1000) clamped to [0, 999]; the point must lie inside the image.
NormalizedCoord normalize_point(PixelPoint p, int width, int height);
// Center of the normalized bin.
PixelPoint denormalize_point(NormalizedCoord n, int width, int height);

std::map<KeypointRole, NormalizedCoord> normalize_keypoints(const KeypointSet& k, int width, int height);

// One "<role>: (<nx>, <ny>)" line per present role in canonical order, '\n'-joined.
std::string render_affordance_text(const KeypointSet& k, const TaskSchema& schema, int width, int height);

enum class ParseMode { tolerant, strict };

// Parses the affordance text into normalized coordinates for the schema roles.
// Tolerant mode accepts prose, (x,y) / [x,y] / [[x,y]] and loose whitespace;
// strict mode only accepts the exact canonical rendering. Errors are ParseError.
std::map<KeypointRole, NormalizedCoord> parse_affordance_normalized(std::string_view text, const TaskSchema& schema,
                                                                    ParseMode mode = ParseMode::tolerant);

// Tolerant parse that returns whichever schema roles are present.
std::map<KeypointRole, NormalizedCoord> parse_affordance_partial(std::string_view text, const TaskSchema& schema);

// Parse and map back to pixels through denormalize_point. Object bindings are
// unknown to the text and come back as 0 unless `bindings` supplies them.
KeypointSet parse_affordance_text(std::string_view text, const TaskSchema& schema, int width, int height,
                                  ParseMode mode = ParseMode::tolerant,
                                  const std::map<KeypointRole, int>& bindings = {});

struct PromptTemplate {
    std::string version = "affordance-prompt/v1";
    std::string system_text;
    // "{instruction}" is replaced by the task instruction, "{roles}" by the required roles.
    std::string question_text;

    static PromptTemplate default_template();
    std::string render(std::string_view instruction, const TaskSchema& schema) const;
};

}  // namespace forge
