// forge: command-line entry point for the dataset tooling.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <spdlog/sinks/basic_file_sink.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"

#include "forge/annotation_api.hpp"
#include "forge/config.hpp"
#include "forge/context.hpp"
#include "forge/dataset.hpp"
#include "forge/error.hpp"
#include "forge/eval.hpp"
#include "forge/fixtures.hpp"
#include "forge/gateway.hpp"
#include "forge/json_io.hpp"
#include "forge/motion.hpp"
#include "forge/png_io.hpp"
#include "forge/synthesis.hpp"
#include "forge/vlm_dataset.hpp"

namespace fs = std::filesystem;
using namespace forge;

namespace {

struct Common {
    std::uint64_t seed = 0;
    std::string config_path;
    CLI::Option* seed_opt = nullptr;

    Config config() const { return config_path.empty() ? Config{} : Config::load(config_path); }
    bool seed_given() const { return seed_opt && seed_opt->count() > 0; }
};

CLI::App* add_command(CLI::App& app, const std::string& name, const std::string& help, Common& common) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--seed", common.seed, "Seed for every random choice");
    sub->add_option("--config", common.config_path, "TOML-style config file")->check(CLI::ExistingFile);
    return sub;
}

std::string read_text(const fs::path& p) {
    const auto bytes = png::read_file(p);
    return std::string(bytes.begin(), bytes.end());
}

std::vector<json> read_jsonl(const fs::path& p) {
    std::vector<json> out;
    std::istringstream in(read_text(p));
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::exception& e) {
            throw Error(ErrorKind::unparseable, fmt::format("{}:{}: {}", p.string(), n, e.what()));
        }
    }
    return out;
}

// "mock" runs the services in-process; anything else is a base URL or a
// config file with a [service] section.
std::unique_ptr<ModelService> make_services(const std::string& spec, const DatasetStore& store, const Config& cfg) {
    if (spec == "mock") {
        MockTables tables = MockTables::defaults();
        tables.add_dataset(store);
        return std::make_unique<MockModelService>(std::move(tables));
    }
    ServiceEndpoint ep;
    apply_service(cfg, ep);
    if (spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0) {
        ep.base_url = spec;
    } else {
        apply_service(Config::load(spec), ep);
    }
    ep.check();
    return std::make_unique<HttpModelService>(ep);
}

void blend(RgbImage& img, const BinaryMask& m, std::array<std::uint8_t, 3> color, double alpha) {
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            if (!m.at(x, y)) continue;
            for (int c = 0; c < 3; ++c) {
                const double v = (1.0 - alpha) * img.at(x, y, c) + alpha * color[c];
                img.at(x, y, c) = static_cast<std::uint8_t>(std::lround(v));
            }
        }
}

void draw_marker(RgbImage& img, PixelPoint p, std::array<std::uint8_t, 3> color) {
    const int cx = static_cast<int>(std::floor(p.x)), cy = static_cast<int>(std::floor(p.y));
    for (int y = cy - 2; y <= cy + 2; ++y)
        for (int x = cx - 2; x <= cx + 2; ++x)
            if (x >= 0 && y >= 0 && x < img.width && y < img.height)
                for (int c = 0; c < 3; ++c) img.at(x, y, c) = color[c];
}

HoldoutSpec holdout_from(const std::vector<std::string>& sets, const std::vector<std::string>& ids) {
    HoldoutSpec h;
    h.object_sets.insert(sets.begin(), sets.end());
    h.record_ids.insert(ids.begin(), ids.end());
    return h;
}

AugmentationConfig augmentation_from(const std::vector<std::string>& names, int replicas, const Config& cfg) {
    AugmentationConfig a;
    apply_augmentation(cfg, a);
    for (const auto& n : names) {
        if (n == "rotate") a.rotate = true;
        else if (n == "crop") a.resized_crop = true;
        else if (n == "hflip") a.hflip = true;
        else if (n == "vflip") a.vflip = true;
        else if (n == "jitter") a.color_jitter = true;
        else throw Error(ErrorKind::invalid_argument, fmt::format("unknown augmentation '{}' (rotate, crop, hflip, vflip, jitter)", n));
    }
    if (replicas > 0) a.replicas = replicas;
    a.check();
    return a;
}

CameraModel default_camera(int width, int height) {
    // Looking straight down from 0.8 m: camera z maps to base -z.
    CameraModel cam;
    cam.fx = cam.fy = width;
    cam.cx = width / 2.0;
    cam.cy = height / 2.0;
    cam.rotation = Eigen::Quaterniond(0.0, 1.0, 0.0, 0.0);
    cam.translation = {0.0, 0.0, 0.8};
    return cam;
}

volatile std::sig_atomic_t g_stop = 0;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"forge: keypoint-affordance dataset synthesis and tooling"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "forge 1.0.0");
    std::string log_level = "info";
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error")->capture_default_str();

    Common common;
    std::string dataset, out, id, services = "mock", host = "127.0.0.1", kind, static_dir, spec_path, camera_path;
    std::size_t n = 500;
    int workers = 1, port = 0, object_index = 0, replicas = 0;
    int fixture_count = 50, novel_count = 10, fixture_w = 160, fixture_h = 120;
    bool all = false, pass_through = false, accepted_only = false;
    std::vector<std::string> holdout_sets, holdout_ids, augment;
    std::string split_path, head = "nl", pred_path, test_path, keypoint_text_path, ledger_path;
    std::string trial_task, trial_set, trial_note;
    bool trial_success = false, trial_failure = false;

    auto* fixtures = add_command(app, "fixtures", "Write procedural table-sweeping fixture scenes", common);
    fixtures->add_option("--out", out, "Dataset directory to create")->required();
    fixtures->add_option("--count", fixture_count, "Number of scenes")->capture_default_str();
    fixtures->add_option("--novel", novel_count, "Trailing scenes tagged 'novel'")->capture_default_str();
    fixtures->add_option("--width", fixture_w)->capture_default_str();
    fixtures->add_option("--height", fixture_h)->capture_default_str();

    auto* validate = add_command(app, "validate", "Validate every record of a dataset", common);
    validate->add_option("--dataset", dataset)->required()->check(CLI::ExistingDirectory);

    auto* synth = add_command(app, "synthesize", "Grow a dataset with synthetic scenes", common);
    synth->add_option("--dataset", dataset, "Human-annotated dataset")->required()->check(CLI::ExistingDirectory);
    synth->add_option("--out", out, "Output dataset directory")->required();
    auto* n_opt = synth->add_option("--n", n, "Number of synthetic records")->capture_default_str();
    auto* ctx_opt = synth->add_option("--context", kind, "soft_edge, depth or seg_mask");
    synth->add_option("--services", services, "'mock', a base URL, or an endpoints config file")->capture_default_str();
    auto* workers_opt = synth->add_option("--workers", workers, "Concurrent records in flight")->capture_default_str();

    auto* context = add_command(app, "context", "Emit context images", common);
    context->add_option("--dataset", dataset)->required()->check(CLI::ExistingDirectory);
    context->add_option("--id", id, "Record id (omit with --all)");
    context->add_flag("--all", all, "Every record; --out is a directory");
    context->add_option("--kind", kind, "soft_edge, depth or seg_mask (default soft_edge)");
    context->add_option("--out", out, "PNG file, or directory with --all")->required();

    auto* preview = add_command(app, "transform-preview", "Overlay one object's sampled transform", common);
    preview->add_option("--dataset", dataset)->required()->check(CLI::ExistingDirectory);
    preview->add_option("--id", id)->required();
    preview->add_option("--object", object_index, "Object index")->capture_default_str();
    preview->add_option("--spec", spec_path, "Transform spec JSON (sampled from --seed otherwise)")->check(CLI::ExistingFile);
    preview->add_option("--out", out, "Overlay PNG")->required();

    auto* build = add_command(app, "build-records", "Export fine-tuning records", common);
    build->add_option("--dataset", dataset)->required()->check(CLI::ExistingDirectory);
    build->add_option("--split", split_path, "split.json from 'forge split' (all records to train otherwise)")->check(CLI::ExistingFile);
    build->add_option("--head", head, "nl or regression")->capture_default_str();
    build->add_option("--augment", augment, "rotate, crop, hflip, vflip, jitter")->delimiter(',');
    build->add_option("--replicas", replicas, "Augmented replicas per record");
    build->add_option("--out", out, "Output directory")->required();

    auto* split_cmd = add_command(app, "split", "Hold out object sets or records", common);
    split_cmd->add_option("--dataset", dataset)->required()->check(CLI::ExistingDirectory);
    split_cmd->add_option("--holdout-set", holdout_sets, "Object-set tag to hold out (repeatable)");
    split_cmd->add_option("--holdout-id", holdout_ids, "Record id to hold out (repeatable)");
    split_cmd->add_flag("--accepted-only", accepted_only, "Drop synthetic records not accepted in review");
    split_cmd->add_option("--out", out, "split.json path")->required();

    auto* plan = add_command(app, "plan", "Turn keypoints and depth into a waypoint plan", common);
    plan->add_option("--dataset", dataset)->required()->check(CLI::ExistingDirectory);
    plan->add_option("--id", id, "Record supplying depth (and keypoints unless --keypoints)")->required();
    plan->add_option("--keypoints", keypoint_text_path, "File with predicted affordance text")->check(CLI::ExistingFile);
    plan->add_option("--camera", camera_path, "Camera JSON (fx, fy, cx, cy, rotation_wxyz, translation)")->check(CLI::ExistingFile);
    plan->add_option("--out", out, "Plan JSON path (table only otherwise)");

    auto* eval = add_command(app, "eval", "Per-keypoint MSE against a test split", common);
    eval->add_option("--pred", pred_path, "Predictions jsonl: {id, text} or {id, keypoints}")->required()->check(CLI::ExistingFile);
    eval->add_option("--test", test_path, "test.jsonl from build-records")->required()->check(CLI::ExistingFile);
    eval->add_option("--dataset", dataset, "Dataset whose schemas to use")->check(CLI::ExistingDirectory);
    eval->add_option("--out", out, "report.json path")->capture_default_str();

    auto* mock = add_command(app, "mock-serve", "Serve the deterministic mock model services", common);
    mock->add_option("--host", host)->capture_default_str();
    mock->add_option("--port", port, "0 picks a free port")->default_val(8089);
    mock->add_option("--dataset", dataset, "Preload descriptors and masks of a dataset")->check(CLI::ExistingDirectory);
    mock->add_flag("--pass-through", pass_through, "Inpainting returns its input");

    auto* serve = add_command(app, "annotate-serve", "Serve the annotation REST API and UI", common);
    serve->add_option("--dataset", dataset)->required()->check(CLI::ExistingDirectory);
    serve->add_option("--host", host)->capture_default_str();
    serve->add_option("--port", port)->default_val(8080);
    serve->add_option("--static", static_dir, "Directory with the UI bundle")->check(CLI::ExistingDirectory);

    auto* trial = add_command(app, "trial", "Record or show robot trial outcomes", common);
    trial->add_option("--ledger", ledger_path, "Trial ledger jsonl")->required();
    trial->require_subcommand(1);
    auto* trial_add = trial->add_subcommand("add", "Append one outcome");
    trial_add->add_option("--task", trial_task)->required();
    trial_add->add_option("--set", trial_set, "Object-set tag");
    trial_add->add_flag("--success", trial_success);
    trial_add->add_flag("--failure", trial_failure);
    trial_add->add_option("--note", trial_note);
    auto* trial_show = trial->add_subcommand("show", "Print the success table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    spdlog::set_level(spdlog::level::from_str(log_level));
    for (auto* sub : app.get_subcommands())
        if (auto* opt = sub->get_option_no_throw("--seed")) common.seed_opt = opt;

    try {
        const Config cfg = common.config();

        if (fixtures->parsed()) {
            FixtureOptions opts;
            opts.count = fixture_count;
            opts.novel_count = novel_count;
            opts.width = fixture_w;
            opts.height = fixture_h;
            if (common.seed_given()) opts.seed = common.seed;
            DatasetStore store = DatasetStore::create(out);
            write_sweeping_fixtures(store, opts);
            fmt::print("wrote {} fixture scenes to {}\n", opts.count, out);
            return 0;
        }

        if (validate->parsed()) {
            const DatasetStore store = DatasetStore::open(dataset);
            std::size_t bad = 0, total = 0;
            for (const auto& [rid, report] : validate_dataset(store)) {
                ++total;
                if (report.empty()) continue;
                ++bad;
                for (const auto& v : report) fmt::print("{}: [{}] {}\n", rid, v.code, v.message);
            }
            fmt::print("{} record(s), {} invalid\n", total, bad);
            return bad == 0 ? 0 : 1;
        }

        if (synth->parsed()) {
            SynthesisConfig sc;
            apply_synthesis(cfg, sc);
            if (n_opt->count() || !cfg.has("synthesis.n")) sc.target_size = n;
            if (common.seed_given()) sc.master_seed = common.seed;
            if (ctx_opt->count()) sc.context_kind = context_kind_from_string(kind);
            if (workers_opt->count()) sc.workers = workers;
            sc.check();

            const DatasetStore in = DatasetStore::open(dataset);
            DatasetStore outs = DatasetStore::create(out);
            fs::create_directories(fs::path(out) / "logs");
            auto file_sink = std::make_shared<spdlog::sinks::basic_file_sink_mt>((fs::path(out) / "logs" / "synthesize.log").string());
            auto console = std::make_shared<spdlog::sinks::stderr_color_sink_mt>();
            auto logger = std::make_shared<spdlog::logger>("synthesize", spdlog::sinks_init_list{console, file_sink});
            logger->set_level(spdlog::get_level());
            logger->info("synthesize n={} seed={} context={} workers={} services={}", sc.target_size, sc.master_seed,
                         to_string(sc.context_kind), sc.workers, services);

            auto svc = make_services(services, in, cfg);
            const auto summary = synthesize_dataset(in, outs, *svc, sc, [&](std::size_t done, std::size_t total) {
                if (done % 50 == 0 || done == total) logger->info("{}/{} records", done, total);
            });
            for (const auto& line : summary.skip_log) logger->warn("skipped: {}", line);
            logger->info("produced {} of {}, skipped {}{}", summary.produced, sc.target_size, summary.skipped,
                         summary.aborted ? " (aborted: failure budget exceeded)" : "");
            logger->flush();
            return summary.produced == sc.target_size && !summary.aborted ? 0 : 1;
        }

        if (context->parsed()) {
            const DatasetStore store = DatasetStore::open(dataset);
            const ContextKind ck = kind.empty() ? ContextKind::soft_edge : context_kind_from_string(kind);
            auto emit = [&](const std::string& rid, const fs::path& dst) {
                const SceneRecord r = store.load_record(rid);
                const SceneAssets a = store.load_assets(r);
                BinaryMask u(r.width, r.height);
                for (const auto& m : a.masks)
                    if (m) u = mask_union(u, *m);
                ContextImage c;
                if (ck == ContextKind::soft_edge) c = compute_soft_edge(a.rgb);
                else if (ck == ContextKind::seg_mask) c = compute_mask_context(u);
                else if (!a.depth) throw Error(ErrorKind::missing_depth, fmt::format("record '{}' has no depth", rid));
                else c = compute_depth_context(*a.depth, u);
                png::write_file_atomic(dst, png::encode_context(c));
            };
            if (all) {
                fs::create_directories(out);
                const auto ids = store.record_ids();
                for (const auto& rid : ids) emit(rid, fs::path(out) / (rid + ".png"));
                fmt::print("wrote {} {} context images to {}\n", ids.size(), to_string(ck), out);
            } else {
                if (id.empty()) throw Error(ErrorKind::invalid_argument, "--id or --all is required");
                emit(id, out);
            }
            return 0;
        }

        if (preview->parsed()) {
            const DatasetStore store = DatasetStore::open(dataset);
            const SceneRecord r = store.load_record(id);
            const SceneAssets a = store.load_assets(r);
            if (object_index < 0 || static_cast<std::size_t>(object_index) >= a.masks.size() || !a.masks[object_index])
                throw Error(ErrorKind::not_found, fmt::format("record '{}' has no mask for object {}", id, object_index));
            const BinaryMask& m = *a.masks[object_index];
            TransformSpec t;
            if (!spec_path.empty()) {
                t = transform_from_json(json::parse(read_text(spec_path)));
            } else {
                SynthesisConfig sc;
                apply_synthesis(cfg, sc);
                t = sample_transform(sc.transform, common.seed, r.width, r.height, m.centroid());
            }
            RgbImage img = a.rgb;
            blend(img, m, {220, 40, 40}, 0.45);
            blend(img, apply_to_mask(t, m), {40, 200, 60}, 0.45);
            for (const auto& [role, kp] : r.keypoints) {
                if (kp.object_index != object_index) continue;
                draw_marker(img, kp.point, {255, 0, 0});
                draw_marker(img, apply_to_point(t, kp.point), {0, 255, 0});
            }
            png::write_file_atomic(out, png::encode_rgb(img));
            fmt::print("{}\n", to_json(t).dump(2));
            return 0;
        }

        if (build->parsed()) {
            const DatasetStore store = DatasetStore::open(dataset);
            const HeadKind hk = head_kind_from_string(head);
            const AugmentationConfig aug = augmentation_from(augment, replicas, cfg);
            std::vector<std::string> train_ids, test_ids;
            if (split_path.empty()) {
                train_ids = store.record_ids();
            } else {
                const json s = json::parse(read_text(split_path));
                train_ids = s.at("train").get<std::vector<std::string>>();
                test_ids = s.at("test").get<std::vector<std::string>>();
            }
            const fs::path dir(out);
            fs::create_directories(dir);
            const auto train = build_records(store, train_ids, hk, aug, common.seed, dir / "images");
            write_jsonl(dir / "train.jsonl", train.records);
            std::size_t test_count = 0;
            if (!split_path.empty()) {
                const auto test = build_records(store, test_ids, hk, AugmentationConfig{}, common.seed, dir / "images");
                write_jsonl(dir / "test.jsonl", test.records);
                test_count = test.records.size();
            }
            for (const auto& d : train.dropped) spdlog::warn("dropped replica {}", d);
            fmt::print("train: {} record(s), test: {} record(s), dropped: {}\n", train.records.size(), test_count,
                       train.dropped.size());
            return 0;
        }

        if (split_cmd->parsed()) {
            const DatasetStore store = DatasetStore::open(dataset);
            const auto keep = export_ids(store, accepted_only ? ExportFilter::accepted_only : ExportFilter::all);
            std::vector<SceneRecord> records;
            for (const auto& rid : keep) records.push_back(store.load_record(rid));
            const HoldoutSpec h = holdout_from(holdout_sets, holdout_ids);
            const SplitResult s = split(records, h);
            png::write_file_atomic(out, dump_pretty(split_manifest(s, h)));
            fmt::print("train: {}, test: {}, excluded: {}\n", s.train.size(), s.test.size(), s.excluded.size());
            return 0;
        }

        if (plan->parsed()) {
            const DatasetStore store = DatasetStore::open(dataset);
            const SceneRecord r = store.load_record(id);
            const TaskSchema schema = store.schema_for(r.task_id);
            const auto depth = store.load_depth(r);
            if (!depth) throw Error(ErrorKind::missing_depth, fmt::format("record '{}' has no depth image", id));
            KeypointSet k = r.keypoints;
            if (!keypoint_text_path.empty())
                k = parse_affordance_text(read_text(keypoint_text_path), schema, r.width, r.height);
            const CameraModel cam =
                camera_path.empty() ? default_camera(r.width, r.height) : camera_from_json(json::parse(read_text(camera_path)));
            PlanConfig pc;
            apply_plan(cfg, pc);
            const MotionPlan mp = plan_motion(k, *depth, cam, schema, pc);
            fmt::print("{}", plan_table(mp));
            if (!out.empty()) png::write_file_atomic(out, dump_pretty(to_json(mp)));
            return 0;
        }

        if (eval->parsed()) {
            std::optional<DatasetStore> store;
            if (!dataset.empty()) store = DatasetStore::open(dataset);
            auto schema_of = [&](const std::string& task) {
                if (store) return store->schema_for(task);
                auto s = find_builtin_schema(task);
                if (!s) throw Error(ErrorKind::not_found, fmt::format("unknown task '{}'; pass --dataset", task));
                return *s;
            };
            std::vector<EvalItem> gt;
            std::map<std::string, const EvalItem*> by_id;
            for (const auto& j : read_jsonl(test_path))
                gt.push_back({j.at("id").get<std::string>(), j.at("task_id").get<std::string>(), j.at("width").get<int>(),
                              j.at("height").get<int>(), keypoints_from_json(j.at("keypoints"))});
            for (const auto& g : gt) by_id[g.id] = &g;
            std::vector<Prediction> preds;
            for (const auto& j : read_jsonl(pred_path)) {
                const std::string pid = j.at("id").get<std::string>();
                auto it = by_id.find(pid);
                if (it == by_id.end()) {
                    preds.push_back({pid, {}, {}});
                    continue;
                }
                const EvalItem& g = *it->second;
                if (j.contains("keypoints")) {
                    preds.push_back(prediction_from_pixels(pid, keypoints_from_json(j.at("keypoints")), g.width, g.height));
                } else {
                    const std::string text = j.contains("text") ? j.at("text").get<std::string>() : j.at("response").get<std::string>();
                    try {
                        preds.push_back(prediction_from_text(pid, text, schema_of(g.task_id), g.width, g.height));
                    } catch (const ParseError& e) {
                        spdlog::warn("{}: unparseable prediction ({}); counted as missing", pid, e.what());
                        preds.push_back({pid, {}, {}});
                    }
                }
            }
            const EvalOptions opts;
            const EvalReport rep = keypoint_mse(preds, gt, opts);
            fmt::print("{}", eval_table(rep));
            for (const auto& u : rep.unknown_predictions) spdlog::warn("prediction '{}' has no ground truth", u);
            png::write_file_atomic(out.empty() ? fs::path("report.json") : fs::path(out), dump_pretty(to_json(rep, opts)));
            return 0;
        }

        if (mock->parsed()) {
            MockTables tables = MockTables::defaults();
            if (!dataset.empty()) tables.add_dataset(DatasetStore::open(dataset));
            ModelServer server(std::make_shared<MockModelService>(std::move(tables), pass_through));
            const int bound = server.start(host, port);
            fmt::print("mock services on http://{}:{}\n", host, bound);
            std::fflush(stdout);
            std::signal(SIGINT, [](int) { g_stop = 1; });
            std::signal(SIGTERM, [](int) { g_stop = 1; });
            while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
            server.stop();
            return 0;
        }

        if (serve->parsed()) {
            DatasetStore store = DatasetStore::open(dataset);
            std::optional<fs::path> sd;
            if (!static_dir.empty()) sd = fs::path(static_dir);
            AnnotationServer server(store, sd);
            const int bound = server.start(host, port);
            fmt::print("annotation API on http://{}:{}\n", host, bound);
            std::fflush(stdout);
            std::signal(SIGINT, [](int) { g_stop = 1; });
            std::signal(SIGTERM, [](int) { g_stop = 1; });
            while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
            server.stop();
            return 0;
        }

        if (trial->parsed()) {
            TrialLedger ledger(ledger_path);
            if (trial_add->parsed()) {
                if (trial_success == trial_failure) throw Error(ErrorKind::invalid_argument, "give exactly one of --success or --failure");
                ledger.append({trial_task, trial_set, trial_success, trial_note});
            }
            if (trial_show->parsed() || trial_add->parsed()) fmt::print("{}", trial_table_text(tabulate(ledger.load())));
            return 0;
        }
    } catch (const Error& e) {
        fmt::print(stderr, "forge: error [{}]: {}\n", to_string(e.kind()), e.what());
        return 1;
    } catch (const std::exception& e) {
        fmt::print(stderr, "forge: error: {}\n", e.what());
        return 1;
    }
    return 0;
}
