#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"

#include "forge/error.hpp"
#include "forge/fixtures.hpp"
#include "forge/synthesis.hpp"
#include "support.hpp"

using namespace forge;
using forge::test::TempDir;
namespace fs = std::filesystem;

namespace {

// Relative path -> contents, skipping logs.
std::map<std::string, std::string> snapshot(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        const auto rel = fs::relative(e.path(), root).generic_string();
        if (rel.rfind("logs/", 0) == 0) continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        out[rel] = ss.str();
    }
    return out;
}

struct Corpus {
    TempDir dir{"syn"};
    DatasetStore store = DatasetStore::create(dir / "in");
    MockTables tables = MockTables::defaults();

    explicit Corpus(int count) {
        FixtureOptions opts;
        opts.count = count;
        opts.novel_count = 1;
        write_sweeping_fixtures(store, opts);
        tables.add_dataset(store);
    }
};

// Fails every inpaint call.
class BrokenInpaint : public MockModelService {
public:
    using MockModelService::MockModelService;

protected:
    RgbImage do_inpaint(const InpaintRequest&) override {
        throw Error(ErrorKind::service_unavailable, "inpaint backend down");
    }
};

}  // namespace

TEST_SUITE("synthesis") {

TEST_CASE("identity transform with pass-through inpainting reproduces the parent") {
    Corpus c(2);
    MockModelService svc(c.tables, true);
    SynthesisConfig cfg;
    cfg.transform = TransformConfig::identity();
    const SceneRecord src = c.store.load_record("human-000");
    const SceneAssets assets = c.store.load_assets(src);
    const auto out = synthesize_record(src, assets, c.store.schema_for(src.task_id), svc, cfg, 99, "syn-x");

    CHECK(out.assets.rgb == assets.rgb);
    for (const auto& [role, kp] : src.keypoints) {
        CHECK(out.record.keypoints.at(role).point == kp.point);
        CHECK(out.record.keypoints.at(role).object_index == kp.object_index);
    }
    const auto* syn = out.record.synthetic();
    REQUIRE(syn != nullptr);
    CHECK(syn->parent_id == "human-000");
    for (const auto& o : syn->objects) CHECK(o.transform.is_identity());
    CHECK(verify_provenance(src, out.record).empty());
}

TEST_CASE("synthetic keypoints follow their recorded transforms") {
    Corpus c(3);
    MockModelService svc(c.tables);
    SynthesisConfig cfg;
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        const SceneRecord src = c.store.load_record("human-00" + std::to_string(seed % 3));
        const SceneAssets assets = c.store.load_assets(src);
        const auto out = synthesize_record(src, assets, c.store.schema_for(src.task_id), svc, cfg, seed, "syn-x");
        CHECK(verify_provenance(src, out.record).empty());
        for (const auto& [role, kp] : out.record.keypoints) CHECK(in_bounds(kp.point, src.width, src.height));
        const auto again = synthesize_record(src, assets, c.store.schema_for(src.task_id), svc, cfg, seed, "syn-x");
        CHECK(again.record == out.record);
        CHECK(again.assets.rgb == out.assets.rgb);
    }
}

TEST_CASE("provenance check catches a moved keypoint and a wrong parent") {
    Corpus c(2);
    MockModelService svc(c.tables);
    SynthesisConfig cfg;
    const SceneRecord src = c.store.load_record("human-000");
    auto out = synthesize_record(src, c.store.load_assets(src), c.store.schema_for(src.task_id), svc, cfg, 5, "syn-x");

    SceneRecord tampered = out.record;
    const auto role = tampered.keypoints.begin()->first;
    Keypoint kp = tampered.keypoints.at(role);
    kp.point.x += 1.0;
    tampered.keypoints.set(role, kp);
    CHECK_FALSE(verify_provenance(src, tampered).empty());

    CHECK_FALSE(verify_provenance(c.store.load_record("human-001"), out.record).empty());
    CHECK_FALSE(verify_provenance(src, src).empty());
}

TEST_CASE("dataset growth is independent of the worker count") {
    Corpus c(4);
    MockModelService svc(c.tables);
    SynthesisConfig cfg;
    cfg.target_size = 8;
    cfg.master_seed = 17;

    DatasetStore one = DatasetStore::create(c.dir / "w1");
    cfg.workers = 1;
    const auto s1 = synthesize_dataset(c.store, one, svc, cfg);
    DatasetStore three = DatasetStore::create(c.dir / "w3");
    cfg.workers = 3;
    const auto s3 = synthesize_dataset(c.store, three, svc, cfg);

    CHECK(s1.produced == 8);
    CHECK(s3.produced == 8);
    CHECK_FALSE(s1.aborted);
    CHECK(snapshot(c.dir / "w1") == snapshot(c.dir / "w3"));

    std::size_t synthetic = 0;
    for (const auto& r : one.load_all()) {
        CHECK(validate_stored_record(one, r).empty());
        if (const auto* syn = r.synthetic()) {
            ++synthetic;
            CHECK(verify_provenance(one.load_record(syn->parent_id), r).empty());
        }
    }
    CHECK(synthetic == 8);
    CHECK(one.record_ids().size() == 12);
}

TEST_CASE("exceeding the failure budget aborts the run") {
    Corpus c(2);
    BrokenInpaint svc(c.tables);
    SynthesisConfig cfg;
    cfg.target_size = 20;
    cfg.failure_budget = 0.05;
    DatasetStore out = DatasetStore::create(c.dir / "out");
    const auto summary = synthesize_dataset(c.store, out, svc, cfg);
    CHECK(summary.aborted);
    CHECK(summary.produced == 0);
    CHECK(summary.skipped == 2);
    REQUIRE(summary.skip_log.size() == 2);
    CHECK(summary.skip_log.front().find("inpaint backend down") != std::string::npos);
}

TEST_CASE("zero target leaves only the copied sources") {
    Corpus c(2);
    MockModelService svc(c.tables);
    SynthesisConfig cfg;
    cfg.target_size = 0;
    DatasetStore out = DatasetStore::create(c.dir / "out");
    const auto summary = synthesize_dataset(c.store, out, svc, cfg);
    CHECK(summary.produced == 0);
    CHECK_FALSE(summary.aborted);
}

TEST_CASE("review queue and export filter") {
    Corpus c(2);
    MockModelService svc(c.tables);
    SynthesisConfig cfg;
    cfg.target_size = 3;
    DatasetStore out = DatasetStore::create(c.dir / "out");
    synthesize_dataset(c.store, out, svc, cfg);

    auto pending = pending_reviews(out);
    REQUIRE(pending.size() == 3);
    out.record_verdict(pending[0], ReviewState::accepted, "");
    out.record_verdict(pending[1], ReviewState::rejected, "smeared");
    CHECK(pending_reviews(out) == std::vector<std::string>{pending[2]});

    const auto accepted = export_ids(out, ExportFilter::accepted_only);
    CHECK(accepted.size() == 3);  // two human records plus one accepted
    CHECK(std::find(accepted.begin(), accepted.end(), pending[0]) != accepted.end());
    CHECK(export_ids(out, ExportFilter::all).size() == 5);
}

TEST_CASE("config validation") {
    SynthesisConfig cfg;
    cfg.failure_budget = -0.1;
    CHECK_THROWS_AS(cfg.check(), Error);
    cfg = SynthesisConfig{};
    cfg.workers = 0;
    CHECK_THROWS_AS(cfg.check(), Error);
    cfg = SynthesisConfig{};
    cfg.transform.scale_min = 2.0;
    CHECK_THROWS_AS(cfg.check(), Error);
}

}
