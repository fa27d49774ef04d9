#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "doctest.h"

#include "forge/error.hpp"
#include "forge/fixtures.hpp"
#include "forge/png_io.hpp"
#include "forge/random.hpp"
#include "forge/vlm_dataset.hpp"
#include "support.hpp"

using namespace forge;
using forge::test::TempDir;

namespace {

int bin(double v, int extent) { return std::clamp(static_cast<int>(std::floor(v * 1000.0 / extent)), 0, 999); }

struct Store {
    TempDir dir{"vlm"};
    DatasetStore store = DatasetStore::create(dir / "ds");
    Store() {
        FixtureOptions opts;
        opts.count = 4;
        opts.novel_count = 1;
        write_sweeping_fixtures(store, opts);
    }
};

SceneRecord human(const std::string& id, const std::string& set) {
    SceneRecord r;
    r.record_id = id;
    r.object_set = set;
    return r;
}

SceneRecord child(const std::string& id, const std::string& parent, const std::string& set) {
    SceneRecord r = human(id, set);
    SyntheticProvenance p;
    p.parent_id = parent;
    r.provenance = p;
    return r;
}

}  // namespace

TEST_SUITE("vlm_dataset") {

TEST_CASE("natural-language records carry the quantized keypoints") {
    Store s;
    const auto ids = s.store.record_ids();
    const auto built = build_records(s.store, ids, HeadKind::natural_language, {}, 1, s.dir / "img");
    REQUIRE(built.records.size() == ids.size());
    CHECK(built.dropped.empty());
    for (const auto& ft : built.records) {
        const SceneRecord rec = s.store.load_record(ft.source_id);
        CHECK(ft.id == ft.source_id);
        CHECK(ft.prompt.find(rec.instruction) != std::string::npos);
        const auto parsed = parse_affordance_normalized(ft.response, s.store.schema_for(rec.task_id), ParseMode::strict);
        for (const auto& [role, kp] : rec.keypoints) {
            CHECK(parsed.at(role).nx == bin(kp.point.x, rec.width));
            CHECK(parsed.at(role).ny == bin(kp.point.y, rec.height));
        }
        CHECK(ft.targets.empty());
    }
}

TEST_CASE("regression records use a per-coordinate mask in canonical order") {
    Store s;
    const auto built = build_records(s.store, {"human-001"}, HeadKind::regression, {}, 1, s.dir / "img");
    REQUIRE(built.records.size() == 1);
    const auto& ft = built.records.front();
    const SceneRecord rec = s.store.load_record("human-001");
    REQUIRE(ft.targets.size() == 10);
    REQUIRE(ft.mask.size() == 10);
    for (std::size_t i = 0; i < kAllRoles.size(); ++i) {
        const auto role = kAllRoles[i];
        CHECK(ft.mask[2 * i] == rec.keypoints.contains(role));
        CHECK(ft.mask[2 * i] == ft.mask[2 * i + 1]);
        if (!rec.keypoints.contains(role)) continue;
        CHECK(ft.targets[2 * i] == bin(rec.keypoints.at(role).point.x, rec.width));
        CHECK(ft.targets[2 * i + 1] == bin(rec.keypoints.at(role).point.y, rec.height));
    }
    CHECK(ft.response.empty());
    const json j = to_json(ft);
    CHECK_FALSE(j.contains("response"));
    CHECK(j.at("targets").size() == 10);
}

TEST_CASE("flips are involutions and mirror keypoints") {
    Rng rng(4);
    RgbImage img(7, 5);
    for (auto& v : img.data) v = static_cast<std::uint8_t>(rng.below(256));
    CHECK(flip_horizontal(flip_horizontal(img)) == img);
    CHECK(flip_vertical(flip_vertical(img)) == img);
    const RgbImage h = flip_horizontal(img);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 7; ++x) CHECK(h.at(x, y, 1) == img.at(6 - x, y, 1));

    Store s;
    AugmentationConfig aug;
    aug.hflip = true;
    aug.flip_probability = 1.0;
    aug.replicas = 2;
    const auto built = build_records(s.store, {"human-000"}, HeadKind::natural_language, aug, 3, s.dir / "img");
    REQUIRE(built.records.size() == 2);
    const SceneRecord rec = s.store.load_record("human-000");
    const RgbImage original = s.store.load_rgb(rec);
    for (const auto& ft : built.records) {
        CHECK(ft.id.rfind("human-000#r", 0) == 0);
        for (const auto& [role, kp] : rec.keypoints) {
            CHECK(ft.keypoints.at(role).point.x == doctest::Approx(rec.width - 1 - kp.point.x));
            CHECK(ft.keypoints.at(role).point.y == kp.point.y);
        }
        CHECK(png::decode_rgb(png::read_file(ft.image)) == flip_horizontal(original));
    }
}

TEST_CASE("augmentation is deterministic in the seed and keeps keypoints in frame") {
    Store s;
    AugmentationConfig aug;
    aug.rotate = true;
    aug.resized_crop = true;
    aug.color_jitter = true;
    aug.hflip = true;
    aug.replicas = 4;
    const auto ids = s.store.record_ids();
    const auto a = build_records(s.store, ids, HeadKind::natural_language, aug, 9, s.dir / "a");
    const auto b = build_records(s.store, ids, HeadKind::natural_language, aug, 9, s.dir / "b");
    REQUIRE(a.records.size() == b.records.size());
    CHECK(a.records.size() + a.dropped.size() == ids.size() * 4);
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].keypoints == b.records[i].keypoints);
        CHECK(a.records[i].response == b.records[i].response);
        CHECK(png::read_file(a.records[i].image) == png::read_file(b.records[i].image));
        for (const auto& [role, kp] : a.records[i].keypoints)
            CHECK(in_bounds(kp.point, a.records[i].width, a.records[i].height));
    }
}

TEST_CASE("augmentation settings are validated") {
    AugmentationConfig aug;
    aug.replicas = 0;
    CHECK_THROWS_AS(aug.check(), Error);
    aug = AugmentationConfig{};
    aug.crop_scale_min = 0.0;
    CHECK_THROWS_AS(aug.check(), Error);
    aug = AugmentationConfig{};
    aug.flip_probability = 1.5;
    CHECK_THROWS_AS(aug.check(), Error);
    CHECK_THROWS_AS(head_kind_from_string("softmax"), Error);
}

TEST_CASE("object-set holdout keeps synthetic descendants out of both sides") {
    const std::vector<SceneRecord> records = {
        human("h1", "seen"), human("h2", "seen"), human("h3", "novel"),
        child("s1", "h1", "seen"), child("s3", "h3", "novel"), child("s3b", "s3", "novel"),
    };
    HoldoutSpec rule;
    rule.object_sets = {"novel"};
    const SplitResult s = split(records, rule);
    CHECK(s.test == std::vector<std::string>{"h3"});
    CHECK(s.train == std::vector<std::string>{"h1", "h2", "s1"});
    CHECK(s.excluded == std::vector<std::string>{"s3", "s3b"});

    const json m = split_manifest(s, rule);
    CHECK(m.at("rule").at("object_sets").at(0) == "novel");
}

TEST_CASE("split property: no test ancestry reaches train") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        Rng rng(seed);
        std::vector<SceneRecord> records;
        const int humans = 3 + static_cast<int>(rng.below(6));
        for (int i = 0; i < humans; ++i) records.push_back(human("h" + std::to_string(i), rng.below(3) ? "seen" : "novel"));
        records.front().object_set = "seen";
        for (int i = 0; i < 15; ++i) {
            const auto& parent = records[rng.below(records.size())];
            records.push_back(child("s" + std::to_string(i), parent.record_id, parent.object_set));
        }
        HoldoutSpec rule;
        rule.object_sets = {"novel"};
        rule.record_ids = {records[records.size() - 1].record_id};
        const SplitResult s = split(records, rule);

        std::map<std::string, const SceneRecord*> by_id;
        for (const auto& r : records) by_id[r.record_id] = &r;
        const std::set<std::string> test(s.test.begin(), s.test.end());
        CHECK(s.train.size() + s.test.size() + s.excluded.size() == records.size());
        for (const auto& id : s.train) {
            for (const SceneRecord* cur = by_id[id]; cur; ) {
                CHECK_FALSE(test.count(cur->record_id));
                CHECK(cur->object_set != "novel");
                const auto* syn = cur->synthetic();
                cur = syn ? by_id[syn->parent_id] : nullptr;
            }
        }
    }
}

TEST_CASE("split errors") {
    const std::vector<SceneRecord> records = {human("h1", "seen"), human("h2", "novel")};
    HoldoutSpec none;
    const SplitResult all = split(records, none);
    CHECK(all.test.empty());
    CHECK(all.train.size() == 2);

    HoldoutSpec nothing;
    nothing.object_sets = {"unseen"};
    try {
        split(records, nothing);
        FAIL("expected empty_set");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::empty_set);
    }

    HoldoutSpec unknown;
    unknown.record_ids = {"h9"};
    try {
        split(records, unknown);
        FAIL("expected not_found");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::not_found);
    }

    HoldoutSpec everything;
    everything.object_sets = {"seen", "novel"};
    CHECK_THROWS_AS(split(records, everything), Error);
}

}
