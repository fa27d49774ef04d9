#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "forge/affordance.hpp"
#include "forge/json_io.hpp"

namespace forge {

struct EvalItem {
    std::string id;
    std::string task_id;
    int width = 0;
    int height = 0;
    KeypointSet keypoints;  // pixels
};

struct Prediction {
    std::string id;
    std::map<KeypointRole, NormalizedCoord> normalized;
    std::map<KeypointRole, PixelPoint> pixels;
};

// Builds a prediction from raw model text (tolerant parse, absent roles stay
// absent) or from explicit pixel keypoints.
Prediction prediction_from_text(const std::string& id, std::string_view text, const TaskSchema& schema, int width,
                                int height);
Prediction prediction_from_pixels(const std::string& id, const KeypointSet& k, int width, int height);

struct EvalOptions {
    // Squared error charged for a missing role in the penalized column only.
    double missing_penalty = 998001.0;
};

struct RoleScore {
    KeypointRole role = KeypointRole::target;
    std::size_t compared = 0;
    std::size_t missing = 0;
    double mse = 0.0;            // normalized units, ((dnx)^2 + (dny)^2) / 2
    double mse_pixels = 0.0;
    double mse_penalized = 0.0;  // missing entries charged missing_penalty
};

struct EvalReport {
    std::vector<RoleScore> roles;  // canonical role order, roles seen in ground truth
    std::size_t records = 0;
    std::size_t compared = 0;
    std::size_t missing = 0;
    double mse = 0.0;
    double mse_pixels = 0.0;
    double mse_penalized = 0.0;
    std::vector<std::string> unknown_predictions;  // ids absent from ground truth
};

// Per-role squared error averaged over records. Ground truth ids without a
// prediction count every role as missing. Throws empty_set when nothing can be
// evaluated.
EvalReport keypoint_mse(const std::vector<Prediction>& predictions, const std::vector<EvalItem>& ground_truth,
                        const EvalOptions& opts = {});

json to_json(const EvalReport& r, const EvalOptions& opts = {});
std::string eval_table(const EvalReport& r);

struct TrialOutcome {
    std::string task_id;
    std::string object_set;
    bool success = false;
    std::string note;
};

struct TrialCount {
    std::size_t successes = 0;
    std::size_t trials = 0;

    std::string ratio() const;  // "k/n"
};

struct TrialTable {
    std::map<std::string, TrialCount> by_task;
    std::map<std::pair<std::string, std::string>, TrialCount> by_task_and_set;
    TrialCount total;
    std::vector<std::string> warnings;
};

// Append-only jsonl of trial outcomes.
class TrialLedger {
public:
    explicit TrialLedger(std::filesystem::path path);

    void append(const TrialOutcome& o) const;
    std::vector<TrialOutcome> load() const;  // torn trailing lines are skipped
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

TrialTable tabulate(const std::vector<TrialOutcome>& outcomes);
std::string trial_table_text(const TrialTable& t);

}  // namespace forge
