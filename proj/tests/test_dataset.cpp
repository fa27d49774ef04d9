#include <fstream>

#include "doctest.h"

#include "forge/dataset.hpp"
#include "forge/error.hpp"
#include "forge/fixtures.hpp"
#include "forge/json_io.hpp"
#include "forge/png_io.hpp"
#include "support.hpp"

using namespace forge;
using forge::test::TempDir;

TEST_SUITE("dataset") {

TEST_CASE("fixtures store and reload losslessly") {
    TempDir dir("ds");
    DatasetStore store = DatasetStore::create(dir.path());
    FixtureOptions opts;
    opts.count = 6;
    opts.novel_count = 2;
    write_sweeping_fixtures(store, opts);

    const auto ids = store.record_ids();
    REQUIRE(ids.size() == 6);
    CHECK(ids.front() == "human-000");
    CHECK(store.load_record("human-005").object_set == "novel");
    CHECK(store.load_record("human-003").object_set == "seen");

    const FixtureScene want = make_sweeping_scene(2, opts);
    const SceneRecord got = store.load_record("human-002");
    CHECK(got.keypoints == want.record.keypoints);
    const SceneAssets a = store.load_assets(got);
    CHECK(a.rgb == want.assets.rgb);
    CHECK(*a.masks[0] == *want.assets.masks[0]);
    // Depth is stored in millimetres.
    for (std::size_t i = 0; i < a.depth->meters.size(); i += 97)
        CHECK(std::abs(a.depth->meters[i] - want.assets.depth->meters[i]) <= 0.0005f);

    for (const auto& [id, report] : validate_dataset(store)) CHECK_MESSAGE(report.empty(), id);

    std::ifstream index(dir.path() / "dataset.jsonl");
    std::string line;
    std::size_t lines = 0;
    while (std::getline(index, line)) ++lines;
    CHECK(lines == 6);
}

TEST_CASE("open fails on a missing directory and ids are sanitized") {
    TempDir dir("ds");
    CHECK_THROWS_AS(DatasetStore::open(dir.path() / "nope"), Error);
    DatasetStore store = DatasetStore::create(dir.path());
    CHECK_FALSE(store.contains("../etc"));
    CHECK_FALSE(store.contains(""));
    CHECK_THROWS_AS(store.load_record("missing"), Error);
}

TEST_CASE("stored image size mismatches are reported") {
    TempDir dir("ds");
    DatasetStore store = DatasetStore::create(dir.path());
    FixtureScene s = make_sweeping_scene(0);
    store.put_scene(s.record, s.assets);
    SceneRecord r = store.load_record(s.record.record_id);
    png::write_file_atomic(store.scene_dir(r.record_id) / "rgb.png", png::encode_rgb(RgbImage(10, 10)));
    CHECK_FALSE(validate_stored_record(store, r).empty());
}

TEST_CASE("review log: last verdict wins, torn lines ignored, append-only") {
    TempDir dir("ds");
    DatasetStore store = DatasetStore::create(dir.path());
    FixtureScene s = make_sweeping_scene(0);
    store.put_scene(s.record, s.assets);
    const std::string id = s.record.record_id;

    CHECK(store.review_state(id) == ReviewState::pending);
    store.record_verdict(id, ReviewState::accepted, "looks right");
    const auto before = std::filesystem::file_size(dir.path() / "review.jsonl");
    store.record_verdict(id, ReviewState::rejected, "");
    CHECK(std::filesystem::file_size(dir.path() / "review.jsonl") > before);
    CHECK(store.review_state(id) == ReviewState::rejected);
    {
        std::ofstream f(dir.path() / "review.jsonl", std::ios::app);
        f << "{\"record_id\": \"" << id << "\", \"verd";
    }
    CHECK(store.review_state(id) == ReviewState::rejected);
    CHECK(store.review_entries().at(id).state == ReviewState::rejected);
    CHECK_THROWS_AS(store.record_verdict("ghost", ReviewState::accepted, ""), Error);
}

TEST_CASE("review state names") {
    CHECK(review_state_from_string("accept") == ReviewState::accepted);
    CHECK(review_state_from_string("rejected") == ReviewState::rejected);
    CHECK_THROWS_AS(review_state_from_string("maybe"), Error);
}

TEST_CASE("inbox scenes stay out of the dataset until promoted") {
    TempDir dir("ds");
    DatasetStore store = DatasetStore::create(dir.path());
    FixtureScene s = make_sweeping_scene(4);
    SceneRecord upload = s.record;
    upload.record_id = "upload-1";
    upload.keypoints = {};
    store.put_inbox_scene(upload, s.assets);

    CHECK(store.record_ids().empty());
    CHECK(store.inbox_ids() == std::vector<std::string>{"upload-1"});
    CHECK(store.in_inbox("upload-1"));
    CHECK(store.load_rgb(store.load_inbox_record("upload-1")) == s.assets.rgb);
    CHECK_THROWS_AS(store.put_inbox_scene(upload, s.assets), Error);

    SceneRecord done = store.load_inbox_record("upload-1");
    done.keypoints = s.record.keypoints;
    store.promote_inbox(done);
    CHECK(store.contains("upload-1"));
    CHECK(store.inbox_ids().empty());
    CHECK(validate_stored_record(store, store.load_record("upload-1")).empty());
}

TEST_CASE("schemas.json overrides built-ins") {
    TempDir dir("ds");
    DatasetStore store = DatasetStore::create(dir.path());
    CHECK(store.schema_for("drawer_closing").task_id == "drawer_closing");
    TaskSchema custom = *find_builtin_schema("table_sweeping");
    custom.task_id = "table_wiping";
    custom.instruction_template = "Wipe the table with the {0}.";
    store.write_schemas({custom});
    CHECK(store.schema_for("table_wiping").instruction_template == "Wipe the table with the {0}.");
    CHECK(store.schema_for("drawer_closing").task_id == "drawer_closing");
    CHECK_THROWS_AS(store.schema_for("juggling"), Error);
}

}  // TEST_SUITE
