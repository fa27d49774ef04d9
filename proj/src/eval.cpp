#include "forge/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "forge/error.hpp"

namespace forge {

namespace {

NormalizedCoord normalize_clamped(PixelPoint p, int width, int height) {
    auto bin = [](double v, int dim) {
        const double b = std::floor(v * 1000.0 / dim);
        return static_cast<int>(std::clamp(b, 0.0, static_cast<double>(kNormalizedMax)));
    };
    return {bin(p.x, width), bin(p.y, height)};
}

double sq_norm(double dx, double dy) { return (dx * dx + dy * dy) / 2.0; }

}  // namespace

Prediction prediction_from_text(const std::string& id, std::string_view text, const TaskSchema& schema, int width,
                                int height) {
    Prediction p{id, parse_affordance_partial(text, schema), {}};
    for (const auto& [role, n] : p.normalized) p.pixels[role] = denormalize_point(n, width, height);
    return p;
}

Prediction prediction_from_pixels(const std::string& id, const KeypointSet& k, int width, int height) {
    if (width <= 0 || height <= 0) throw Error(ErrorKind::invalid_argument, "image size must be positive");
    Prediction p{id, {}, {}};
    for (const auto& [role, kp] : k) {
        p.pixels[role] = kp.point;
        p.normalized[role] = normalize_clamped(kp.point, width, height);
    }
    return p;
}

EvalReport keypoint_mse(const std::vector<Prediction>& predictions, const std::vector<EvalItem>& ground_truth,
                        const EvalOptions& opts) {
    if (ground_truth.empty()) throw Error(ErrorKind::empty_set, "no ground-truth records to evaluate");

    std::map<std::string, const Prediction*> by_id;
    for (const auto& p : predictions) {
        if (!by_id.emplace(p.id, &p).second)
            throw Error(ErrorKind::duplicate_role, fmt::format("prediction '{}' appears twice", p.id));
    }
    EvalReport rep;
    std::set<std::string> gt_ids;

    struct Acc {
        std::size_t compared = 0, missing = 0;
        double sum = 0.0, sum_px = 0.0;
    };
    std::map<KeypointRole, Acc> acc;

    for (const auto& item : ground_truth) {
        if (!gt_ids.insert(item.id).second)
            throw Error(ErrorKind::conflict, fmt::format("ground truth lists '{}' twice", item.id));
        ++rep.records;
        auto it = by_id.find(item.id);
        const Prediction* pred = it == by_id.end() ? nullptr : it->second;
        const auto truth = normalize_keypoints(item.keypoints, item.width, item.height);
        for (const auto& [role, n] : truth) {
            Acc& a = acc[role];
            if (!pred || !pred->normalized.count(role)) {
                ++a.missing;
                continue;
            }
            const NormalizedCoord q = pred->normalized.at(role);
            a.sum += sq_norm(q.nx - n.nx, q.ny - n.ny);
            const PixelPoint gp = item.keypoints.at(role).point;
            const PixelPoint pp = pred->pixels.at(role);
            a.sum_px += sq_norm(pp.x - gp.x, pp.y - gp.y);
            ++a.compared;
        }
    }
    for (const auto& p : predictions)
        if (!gt_ids.count(p.id)) rep.unknown_predictions.push_back(p.id);

    double sum = 0.0, sum_px = 0.0;
    for (const auto& [role, a] : acc) {
        RoleScore s;
        s.role = role;
        s.compared = a.compared;
        s.missing = a.missing;
        if (a.compared) {
            s.mse = a.sum / a.compared;
            s.mse_pixels = a.sum_px / a.compared;
        }
        s.mse_penalized = (a.sum + opts.missing_penalty * a.missing) / (a.compared + a.missing);
        rep.roles.push_back(s);
        rep.compared += a.compared;
        rep.missing += a.missing;
        sum += a.sum;
        sum_px += a.sum_px;
    }
    if (rep.compared + rep.missing == 0) throw Error(ErrorKind::empty_set, "ground truth has no keypoints");
    if (rep.compared) {
        rep.mse = sum / rep.compared;
        rep.mse_pixels = sum_px / rep.compared;
    }
    rep.mse_penalized = (sum + opts.missing_penalty * rep.missing) / (rep.compared + rep.missing);
    return rep;
}

json to_json(const EvalReport& r, const EvalOptions& opts) {
    json roles = json::object();
    for (const auto& s : r.roles)
        roles[std::string(to_string(s.role))] = {{"compared", s.compared}, {"missing", s.missing},       {"mse", s.mse},
                                    {"mse_pixels", s.mse_pixels}, {"mse_penalized", s.mse_penalized}};
    return {{"metric",
             {{"space", "normalized 0-999"},
              {"per_entry", "((dnx)^2 + (dny)^2) / 2"},
              {"missing_policy", "reported separately; penalized column charges missing_penalty"},
              {"missing_penalty", opts.missing_penalty}}},
            {"records", r.records},
            {"compared", r.compared},
            {"missing", r.missing},
            {"mse", r.mse},
            {"mse_pixels", r.mse_pixels},
            {"mse_penalized", r.mse_penalized},
            {"roles", roles},
            {"unknown_predictions", r.unknown_predictions}};
}

std::string eval_table(const EvalReport& r) {
    std::string out = fmt::format("{:<13} {:>8} {:>8} {:>12} {:>12} {:>14}\n", "role", "compared", "missing", "mse",
                                  "mse [px^2]", "mse penalized");
    auto row = [&](std::string_view name, std::size_t c, std::size_t m, double a, double b, double p) {
        out += fmt::format("{:<13} {:>8} {:>8} {:>12.3f} {:>12.3f} {:>14.3f}\n", name, c, m, a, b, p);
    };
    for (const auto& s : r.roles) row(to_string(s.role), s.compared, s.missing, s.mse, s.mse_pixels, s.mse_penalized);
    row("overall", r.compared, r.missing, r.mse, r.mse_pixels, r.mse_penalized);
    return out;
}

std::string TrialCount::ratio() const { return fmt::format("{}/{}", successes, trials); }

TrialLedger::TrialLedger(std::filesystem::path path) : path_(std::move(path)) {}

void TrialLedger::append(const TrialOutcome& o) const {
    if (o.task_id.empty()) throw Error(ErrorKind::invalid_argument, "trial needs a task id");
    const json j{{"task_id", o.task_id}, {"object_set", o.object_set}, {"success", o.success}, {"note", o.note}};
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    std::ofstream f(path_, std::ios::binary | std::ios::app);
    if (!f) throw Error(ErrorKind::io, fmt::format("cannot open ledger {}", path_.string()));
    f << j.dump() << '\n';
    f.flush();
    if (!f) throw Error(ErrorKind::io, fmt::format("cannot append to ledger {}", path_.string()));
}

std::vector<TrialOutcome> TrialLedger::load() const {
    std::vector<TrialOutcome> out;
    std::ifstream f(path_, std::ios::binary);
    if (!f) return out;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            out.push_back({j.at("task_id").get<std::string>(), j.value("object_set", ""), j.at("success").get<bool>(),
                           j.value("note", "")});
        } catch (const json::exception&) {
        }
    }
    return out;
}

TrialTable tabulate(const std::vector<TrialOutcome>& outcomes) {
    TrialTable t;
    for (const auto& o : outcomes) {
        for (TrialCount* c : {&t.by_task[o.task_id], &t.by_task_and_set[{o.task_id, o.object_set}], &t.total}) {
            ++c->trials;
            if (o.success) ++c->successes;
        }
    }
    if (outcomes.empty()) t.warnings.push_back("ledger is empty; no trials recorded");
    return t;
}

std::string trial_table_text(const TrialTable& t) {
    std::string out = fmt::format("{:<20} {:<12} {:>8}\n", "task", "object set", "success");
    for (const auto& [key, c] : t.by_task_and_set)
        out += fmt::format("{:<20} {:<12} {:>8}\n", key.first, key.second.empty() ? "-" : key.second, c.ratio());
    for (const auto& [task, c] : t.by_task) out += fmt::format("{:<20} {:<12} {:>8}\n", task, "(all)", c.ratio());
    out += fmt::format("{:<20} {:<12} {:>8}\n", "total", "", t.total.ratio());
    for (const auto& w : t.warnings) out += fmt::format("warning: {}\n", w);
    return out;
}

}  // namespace forge
