#include "forge/affordance.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "forge/error.hpp"

namespace forge {

std::string_view to_string(KeypointRole role) {
    switch (role) {
        case KeypointRole::grasp: return "grasp";
        case KeypointRole::function: return "function";
        case KeypointRole::target: return "target";
        case KeypointRole::pre_contact: return "pre_contact";
        case KeypointRole::post_contact: return "post_contact";
    }
    return "grasp";
}

std::optional<KeypointRole> role_from_string(std::string_view name) {
    for (auto r : kAllRoles)
        if (to_string(r) == name) return r;
    return std::nullopt;
}

std::size_t role_index(KeypointRole role) { return static_cast<std::size_t>(role); }

void KeypointSet::add(KeypointRole role, Keypoint kp) {
    if (!entries_.emplace(role, kp).second)
        throw Error(ErrorKind::duplicate_role, fmt::format("role '{}' already present", to_string(role)));
}

const Keypoint& KeypointSet::at(KeypointRole role) const {
    auto it = entries_.find(role);
    if (it == entries_.end()) throw Error(ErrorKind::missing_role, fmt::format("role '{}' absent", to_string(role)));
    return it->second;
}

std::set<KeypointRole> KeypointSet::roles() const {
    std::set<KeypointRole> out;
    for (const auto& [r, _] : entries_) out.insert(r);
    return out;
}

void TaskSchema::check() const {
    if (task_id.empty()) throw Error(ErrorKind::invalid_argument, "task schema without task_id");
    if (required_roles.empty()) throw Error(ErrorKind::invalid_argument, fmt::format("schema '{}' requires no roles", task_id));
    if (!required_roles.count(KeypointRole::target))
        throw Error(ErrorKind::invalid_argument, fmt::format("schema '{}' must require the target role", task_id));
    if (!std::isfinite(gripper_height.meters) || !std::isfinite(gripper_orientation.yaw))
        throw Error(ErrorKind::invalid_argument, fmt::format("schema '{}' has non-finite gripper offsets", task_id));
}

std::string TaskSchema::render_instruction(const std::vector<std::string>& descriptors) const {
    std::string out = instruction_template;
    for (std::size_t i = 0; i < descriptors.size(); ++i) {
        const std::string slot = "{" + std::to_string(i) + "}";
        for (auto pos = out.find(slot); pos != std::string::npos; pos = out.find(slot, pos + descriptors[i].size()))
            out.replace(pos, slot.size(), descriptors[i]);
    }
    return out;
}

const std::vector<TaskSchema>& builtin_schemas() {
    using R = KeypointRole;
    static const std::vector<TaskSchema> schemas = {
        {"table_sweeping", "Use the {0} to sweep the {1}.",
         {R::grasp, R::function, R::target, R::pre_contact, R::post_contact},
         HeightMode::offset(0.02), OrientationMode::grasp_to_function()},
        {"drawer_closing", "Close the {0}.",
         {R::function, R::target, R::pre_contact, R::post_contact},
         HeightMode::offset(0.03), OrientationMode::fixed_yaw(0.0)},
        {"towel_hanging", "Hang the {0} on the {1}.",
         {R::grasp, R::function, R::target, R::pre_contact, R::post_contact},
         HeightMode::offset(0.01), OrientationMode::fixed_yaw(0.0)},
        {"trowel_pouring", "Use the {0} to pour the {1} into the {2}.",
         {R::grasp, R::function, R::target, R::pre_contact, R::post_contact},
         HeightMode::offset(0.02), OrientationMode::grasp_to_function()},
        {"usb_unplugging", "Unplug the {0}.",
         {R::grasp, R::function, R::target, R::pre_contact, R::post_contact},
         HeightMode::offset(0.01), OrientationMode::grasp_to_function()},
    };
    return schemas;
}

std::optional<TaskSchema> find_builtin_schema(std::string_view task_id) {
    for (const auto& s : builtin_schemas())
        if (s.task_id == task_id) return s;
    return std::nullopt;
}

NormalizedCoord normalize_point(PixelPoint p, int width, int height) {
    if (width < 1 || height < 1) throw Error(ErrorKind::invalid_argument, "image dimensions must be >= 1");
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !in_bounds(p, width, height))
        throw Error(ErrorKind::bounds, fmt::format("point ({}, {}) outside {}x{} image", p.x, p.y, width, height));
    auto bin = [](double v, int dim) {
        return std::clamp(static_cast<int>(std::floor(v * 1000.0 / dim)), 0, kNormalizedMax);
    };
    return {bin(p.x, width), bin(p.y, height)};
}

PixelPoint denormalize_point(NormalizedCoord n, int width, int height) {
    return {(n.nx + 0.5) / 1000.0 * width, (n.ny + 0.5) / 1000.0 * height};
}

std::map<KeypointRole, NormalizedCoord> normalize_keypoints(const KeypointSet& k, int width, int height) {
    std::map<KeypointRole, NormalizedCoord> out;
    for (const auto& [role, kp] : k) out[role] = normalize_point(kp.point, width, height);
    return out;
}

namespace {

void require_schema_roles(const std::set<KeypointRole>& present, const TaskSchema& schema) {
    schema.check();
    if (present != schema.required_roles) {
        std::string want, got;
        for (auto r : schema.required_roles) want += fmt::format("{} ", to_string(r));
        for (auto r : present) got += fmt::format("{} ", to_string(r));
        throw Error(ErrorKind::schema_mismatch,
                    fmt::format("keypoint roles [{}] do not match schema '{}' roles [{}]", got, schema.task_id, want));
    }
}

std::string render_normalized(const std::map<KeypointRole, NormalizedCoord>& coords) {
    std::string out;
    for (auto role : kAllRoles) {
        auto it = coords.find(role);
        if (it == coords.end()) continue;
        if (!out.empty()) out += '\n';
        out += fmt::format("{}: ({}, {})", to_string(role), it->second.nx, it->second.ny);
    }
    return out;
}

}  // namespace

std::string render_affordance_text(const KeypointSet& k, const TaskSchema& schema, int width, int height) {
    require_schema_roles(k.roles(), schema);
    return render_normalized(normalize_keypoints(k, width, height));
}

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

// Case-insensitive match of `word` at `pos`.
bool match_at(std::string_view text, std::size_t pos, std::string_view word) {
    if (pos + word.size() > text.size()) return false;
    for (std::size_t i = 0; i < word.size(); ++i)
        if (lower(text[pos + i]) != word[i]) return false;
    return true;
}

struct RoleMention {
    KeypointRole role;
    TextSpan span;
};

// Recognizes "grasp", "function", "target", and pre/post contact written with
// '_', '-', ' ' or nothing between the halves. Requires word boundaries.
std::optional<RoleMention> match_role(std::string_view text, std::size_t pos) {
    if (pos > 0 && is_word_char(text[pos - 1])) return std::nullopt;
    auto finish = [&](KeypointRole r, std::size_t len) -> std::optional<RoleMention> {
        const std::size_t end = pos + len;
        if (end < text.size() && std::isalnum(static_cast<unsigned char>(text[end]))) return std::nullopt;
        return RoleMention{r, {pos, len}};
    };
    if (match_at(text, pos, "grasp")) return finish(KeypointRole::grasp, 5);
    if (match_at(text, pos, "function")) return finish(KeypointRole::function, 8);
    if (match_at(text, pos, "target")) return finish(KeypointRole::target, 6);
    for (auto [prefix, role] : {std::pair{std::string_view("pre"), KeypointRole::pre_contact},
                                std::pair{std::string_view("post"), KeypointRole::post_contact}}) {
        if (!match_at(text, pos, prefix)) continue;
        std::size_t p = pos + prefix.size();
        if (p < text.size() && (text[p] == '_' || text[p] == '-' || text[p] == ' ')) ++p;
        if (match_at(text, p, "contact")) return finish(role, p + 7 - pos);
    }
    return std::nullopt;
}

struct CoordTuple {
    long nx;
    long ny;
    TextSpan span;
    TextSpan nx_span;
    TextSpan ny_span;
};

// Attempts a bracketed integer pair at `pos` (which holds '(' or '[').
// Returns nullopt when the bracket is prose; throws when it starts like a
// coordinate but is malformed.
std::optional<CoordTuple> match_tuple(std::string_view text, std::size_t pos, std::size_t& end_out) {
    std::string closers;
    std::size_t p = pos;
    while (p < text.size() && (text[p] == '(' || text[p] == '[') && closers.size() < 2) {
        closers.insert(closers.begin(), text[p] == '(' ? ')' : ']');
        ++p;
    }
    auto skip_ws = [&] {
        while (p < text.size() && std::isspace(static_cast<unsigned char>(text[p]))) ++p;
    };
    skip_ws();
    if (p >= text.size() || !(std::isdigit(static_cast<unsigned char>(text[p])) || text[p] == '-' || text[p] == '+'))
        return std::nullopt;

    auto fail = [&](const std::string& why) -> ParseError {
        const std::size_t stop = std::min(text.size(), p + 1);
        return ParseError(ErrorKind::unparseable, fmt::format("malformed coordinate pair: {}", why), {pos, stop - pos});
    };
    auto read_int = [&](TextSpan& span) -> long {
        const std::size_t start = p;
        bool neg = false;
        if (text[p] == '-' || text[p] == '+') neg = text[p++] == '-';
        const std::size_t digits = p;
        long v = 0;
        while (p < text.size() && std::isdigit(static_cast<unsigned char>(text[p]))) {
            v = std::min(v * 10 + (text[p] - '0'), 1000000L);
            ++p;
        }
        if (p == digits) throw fail("expected digits");
        if (p < text.size() && (text[p] == '.' || std::isalpha(static_cast<unsigned char>(text[p]))))
            throw fail("coordinates must be integers");
        span = {start, p - start};
        return neg ? -v : v;
    };

    CoordTuple t{};
    t.nx = read_int(t.nx_span);
    skip_ws();
    if (p >= text.size() || text[p] != ',') throw fail("expected ','");
    ++p;
    skip_ws();
    if (p >= text.size()) throw fail("expected second coordinate");
    t.ny = read_int(t.ny_span);
    skip_ws();
    for (char c : closers) {
        if (p >= text.size() || text[p] != c) throw fail(fmt::format("expected '{}'", c));
        ++p;
    }
    t.span = {pos, p - pos};
    end_out = p;
    return t;
}

std::map<KeypointRole, NormalizedCoord> parse_impl(std::string_view text, const TaskSchema& schema, ParseMode mode,
                                                   bool require_all) {
    schema.check();
    std::map<KeypointRole, NormalizedCoord> out;
    std::map<KeypointRole, TextSpan> seen;
    std::optional<RoleMention> pending;

    for (std::size_t pos = 0; pos < text.size();) {
        const char c = text[pos];
        if (c == '(' || c == '[') {
            std::size_t end = pos;
            auto tuple = match_tuple(text, pos, end);
            if (!tuple) {
                ++pos;
                continue;
            }
            if (!pending)
                throw ParseError(ErrorKind::unparseable, "coordinate pair without a preceding role name", tuple->span);
            const KeypointRole role = pending->role;
            pending.reset();
            for (auto [v, axis, span] : {std::tuple{tuple->nx, "nx", tuple->nx_span},
                                         std::tuple{tuple->ny, "ny", tuple->ny_span}}) {
                if (v < 0 || v > kNormalizedMax)
                    throw ParseError(ErrorKind::out_of_range,
                                     fmt::format("{} = {} for role '{}' is outside [0, 999]", axis, v, to_string(role)),
                                     span);
            }
            if (seen.count(role))
                throw ParseError(ErrorKind::duplicate_role, fmt::format("role '{}' given twice", to_string(role)),
                                 tuple->span);
            seen[role] = tuple->span;
            if (schema.required_roles.count(role)) {
                out[role] = {static_cast<int>(tuple->nx), static_cast<int>(tuple->ny)};
            } else if (mode == ParseMode::strict) {
                throw ParseError(ErrorKind::schema_mismatch,
                                 fmt::format("role '{}' is not part of schema '{}'", to_string(role), schema.task_id),
                                 tuple->span);
            }
            pos = end;
            continue;
        }
        if (auto m = match_role(text, pos)) {
            pending = m;
            pos += m->span.length;
            continue;
        }
        ++pos;
    }

    for (auto role : schema.required_roles) {
        if (require_all && !out.count(role))
            throw ParseError(ErrorKind::missing_role, fmt::format("required role '{}' not found", to_string(role)),
                             {text.size(), 0});
    }

    if (mode == ParseMode::strict) {
        const std::string canonical = render_normalized(out);
        if (canonical != text) {
            std::size_t i = 0;
            while (i < canonical.size() && i < text.size() && canonical[i] == text[i]) ++i;
            throw ParseError(ErrorKind::unparseable, "text deviates from the canonical affordance format",
                             {i, text.size() > i ? text.size() - i : 0});
        }
    }
    return out;
}

}  // namespace

std::map<KeypointRole, NormalizedCoord> parse_affordance_normalized(std::string_view text, const TaskSchema& schema,
                                                                    ParseMode mode) {
    return parse_impl(text, schema, mode, true);
}

std::map<KeypointRole, NormalizedCoord> parse_affordance_partial(std::string_view text, const TaskSchema& schema) {
    return parse_impl(text, schema, ParseMode::tolerant, false);
}

KeypointSet parse_affordance_text(std::string_view text, const TaskSchema& schema, int width, int height,
                                  ParseMode mode, const std::map<KeypointRole, int>& bindings) {
    KeypointSet out;
    for (const auto& [role, n] : parse_affordance_normalized(text, schema, mode)) {
        auto b = bindings.find(role);
        out.add(role, {denormalize_point(n, width, height), b == bindings.end() ? 0 : b->second});
    }
    return out;
}

PromptTemplate PromptTemplate::default_template() {
    return {"affordance-prompt/v1",
            "You are a robot manipulation assistant. Given a top-down image of a table-top scene and a task, "
            "predict the keypoint affordances as integer image coordinates normalized to [0, 999].",
            "Task: {instruction}\nAnswer with one line per keypoint, in the form <role>: (x, y), for: {roles}."};
}

std::string PromptTemplate::render(std::string_view instruction, const TaskSchema& schema) const {
    std::string roles;
    for (auto r : kAllRoles) {
        if (!schema.required_roles.count(r)) continue;
        if (!roles.empty()) roles += ", ";
        roles += to_string(r);
    }
    std::string q = question_text;
    auto replace = [&q](std::string_view slot, std::string_view value) {
        for (auto pos = q.find(slot); pos != std::string::npos; pos = q.find(slot, pos + value.size()))
            q.replace(pos, slot.size(), value);
    };
    replace("{instruction}", instruction);
    replace("{roles}", roles);
    return system_text + "\n" + q;
}

}  // namespace forge
