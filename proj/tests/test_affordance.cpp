#include <cmath>
#include <string>

#include "doctest.h"

#include "forge/affordance.hpp"
#include "forge/error.hpp"
#include "forge/random.hpp"

using namespace forge;

namespace {

TaskSchema schema_with(std::set<KeypointRole> roles) {
    TaskSchema s = *find_builtin_schema("table_sweeping");
    s.task_id = "custom";
    s.required_roles = std::move(roles);
    return s;
}

template <class Fn>
ParseError expect_parse_error(Fn fn) {
    try {
        fn();
    } catch (const ParseError& e) {
        return e;
    }
    FAIL("expected a ParseError");
    return ParseError(ErrorKind::invalid_argument, "", {});
}

}  // namespace

TEST_SUITE("affordance") {

TEST_CASE("normalize_point follows floor(x / W * 1000)") {
    CHECK(normalize_point({320.0, 240.0}, 640, 480) == NormalizedCoord{500, 500});
    CHECK(normalize_point({0.0, 0.0}, 17, 3) == NormalizedCoord{0, 0});
    // floor(639/640 * 1000) = floor(998.4375); floor(479/480 * 1000) = floor(997.916..)
    CHECK(normalize_point({639.0, 479.0}, 640, 480) == NormalizedCoord{998, 997});
    CHECK(normalize_point({639.999, 479.999}, 640, 480) == NormalizedCoord{999, 999});
}

TEST_CASE("normalize_point rejects points outside the image") {
    for (PixelPoint p : {PixelPoint{640.0, 10.0}, PixelPoint{-0.1, 10.0}, PixelPoint{10.0, 480.0}}) {
        try {
            normalize_point(p, 640, 480);
            FAIL("accepted an out-of-bounds point");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::bounds);
        }
    }
}

TEST_CASE("denormalize_point returns the bin center") {
    const PixelPoint p = denormalize_point({500, 500}, 640, 480);
    CHECK(p.x == doctest::Approx(320.32).epsilon(1e-12));  // 500.5 / 1000 * 640
    CHECK(p.y == doctest::Approx(240.24).epsilon(1e-12));  // 500.5 / 1000 * 480
    const PixelPoint o = denormalize_point({0, 0}, 1000, 1000);
    CHECK(o.x == 0.5);
    CHECK(o.y == 0.5);
}

TEST_CASE("normalize(denormalize(n)) = n over the full grid for awkward sizes") {
    for (auto [w, h] : {std::pair{640, 480}, std::pair{7, 3}, std::pair{1, 1}, std::pair{1999, 1001}}) {
        for (int nx = 0; nx <= 999; ++nx) {
            const int ny = (nx * 37) % 1000;
            const NormalizedCoord n{nx, ny};
            REQUIRE(normalize_point(denormalize_point(n, w, h), w, h) == n);
        }
    }
}

TEST_CASE("render produces canonical lines") {
    KeypointSet k;
    k.add(KeypointRole::grasp, {{320.0, 240.0}, 0});
    k.add(KeypointRole::target, {{10.0, 600.0}, 0});
    const TaskSchema s = schema_with({KeypointRole::grasp, KeypointRole::target});
    // floor(240/640 * 1000) = 375
    CHECK(render_affordance_text(k, s, 640, 640) == "grasp: (500, 375)\ntarget: (15, 937)");
}

TEST_CASE("render orders all five roles canonically regardless of insertion") {
    KeypointSet k;
    k.add(KeypointRole::post_contact, {{5.0, 5.0}, 1});
    k.add(KeypointRole::target, {{4.0, 4.0}, 1});
    k.add(KeypointRole::grasp, {{1.0, 1.0}, 0});
    k.add(KeypointRole::pre_contact, {{3.0, 3.0}, 1});
    k.add(KeypointRole::function, {{2.0, 2.0}, 0});
    const std::string text = render_affordance_text(k, *find_builtin_schema("table_sweeping"), 10, 10);
    CHECK(text == "grasp: (100, 100)\nfunction: (200, 200)\ntarget: (400, 400)\npre_contact: (300, 300)\npost_contact: (500, 500)");
}

TEST_CASE("render rejects a key set that differs from the schema") {
    KeypointSet k;
    k.add(KeypointRole::target, {{1.0, 1.0}, 0});
    try {
        render_affordance_text(k, *find_builtin_schema("table_sweeping"), 10, 10);
        FAIL("rendered a partial set");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::schema_mismatch);
    }
}

TEST_CASE("schemas must require a target") {
    TaskSchema s = schema_with({});
    CHECK_THROWS_AS(s.check(), Error);
    s.required_roles = {KeypointRole::grasp};
    CHECK_THROWS_AS(s.check(), Error);
    s.required_roles = {KeypointRole::target};
    CHECK_NOTHROW(s.check());
}

TEST_CASE("builtin drawer closing needs everything but the grasp point") {
    const TaskSchema d = *find_builtin_schema("drawer_closing");
    CHECK_FALSE(d.required_roles.count(KeypointRole::grasp));
    CHECK(d.required_roles.size() == 4);
    CHECK(find_builtin_schema("table_sweeping")->required_roles.size() == 5);
    CHECK_FALSE(find_builtin_schema("juggling").has_value());
}

TEST_CASE("tolerant parse handles prose and bracket styles") {
    const TaskSchema s = schema_with({KeypointRole::grasp, KeypointRole::target});
    const auto got = parse_affordance_normalized("The grasp point is at [[512,340]]. target: (100, 900)", s);
    CHECK(got.at(KeypointRole::grasp) == NormalizedCoord{512, 340});
    CHECK(got.at(KeypointRole::target) == NormalizedCoord{100, 900});

    const auto loose = parse_affordance_normalized("GRASP  :[ 1 ,2 ]\n\n Pre-contact (3,4) Target ( 5 , 6 )",
                                                   schema_with({KeypointRole::grasp, KeypointRole::target,
                                                                KeypointRole::pre_contact}));
    CHECK(loose.at(KeypointRole::pre_contact) == NormalizedCoord{3, 4});
    CHECK(loose.at(KeypointRole::target) == NormalizedCoord{5, 6});
}

TEST_CASE("tolerant parse ignores roles outside the schema") {
    const TaskSchema s = schema_with({KeypointRole::target});
    const auto got = parse_affordance_normalized("grasp: (1, 2)\ntarget: (3, 4)", s);
    CHECK(got.size() == 1);
    CHECK(got.at(KeypointRole::target) == NormalizedCoord{3, 4});
}

TEST_CASE("parse errors carry distinct kinds and spans") {
    const TaskSchema s = schema_with({KeypointRole::grasp, KeypointRole::target});

    const std::string over = "grasp: (1000, 10)\ntarget: (1, 1)";
    auto e = expect_parse_error([&] { parse_affordance_normalized(over, s); });
    CHECK(e.kind() == ErrorKind::out_of_range);
    CHECK(std::string(e.what()).find("nx") != std::string::npos);
    CHECK(over.substr(e.span().offset, e.span().length) == "1000");

    e = expect_parse_error([&] { parse_affordance_normalized("grasp: (1, 2)", s); });
    CHECK(e.kind() == ErrorKind::missing_role);

    const std::string dup = "grasp: (1, 2) target: (3, 4) grasp: (5, 6)";
    e = expect_parse_error([&] { parse_affordance_normalized(dup, s); });
    CHECK(e.kind() == ErrorKind::duplicate_role);
    CHECK(dup.substr(e.span().offset, e.span().length) == "(5, 6)");

    e = expect_parse_error([&] { parse_affordance_normalized("grasp: (1, x) target: (3, 4)", s); });
    CHECK(e.kind() == ErrorKind::unparseable);

    e = expect_parse_error([&] { parse_affordance_normalized("(1, 2) grasp: (1, 2) target: (3, 4)", s); });
    CHECK(e.kind() == ErrorKind::unparseable);
    CHECK(e.span().offset == 0);

    e = expect_parse_error([&] { parse_affordance_normalized("grasp: (1, 2) target: (3, -4)", s); });
    CHECK(e.kind() == ErrorKind::out_of_range);
    CHECK(std::string(e.what()).find("ny") != std::string::npos);
}

TEST_CASE("strict parse accepts only the canonical rendering") {
    const TaskSchema s = schema_with({KeypointRole::grasp, KeypointRole::target});
    CHECK_NOTHROW(parse_affordance_normalized("grasp: (1, 2)\ntarget: (3, 4)", s, ParseMode::strict));
    CHECK(expect_parse_error([&] { parse_affordance_normalized("grasp: [1, 2]\ntarget: (3, 4)", s, ParseMode::strict); })
              .kind() == ErrorKind::unparseable);
    CHECK(expect_parse_error([&] {
              parse_affordance_normalized("grasp: (1, 2)\ntarget: (3, 4)\nfunction: (5, 6)", s, ParseMode::strict);
          }).kind() == ErrorKind::schema_mismatch);
    CHECK(expect_parse_error([&] { parse_affordance_normalized("target: (3, 4)\ngrasp: (1, 2)", s, ParseMode::strict); })
              .kind() == ErrorKind::unparseable);
}

TEST_CASE("partial parse returns what is present") {
    const TaskSchema s = *find_builtin_schema("table_sweeping");
    const auto got = parse_affordance_partial("target: (3, 4) and function at [7, 8]", s);
    CHECK(got.size() == 2);
    CHECK(got.at(KeypointRole::function) == NormalizedCoord{7, 8});
}

TEST_CASE("parse_affordance_text denormalizes and applies bindings") {
    const TaskSchema s = schema_with({KeypointRole::grasp, KeypointRole::target});
    const KeypointSet k = parse_affordance_text("grasp: (500, 500)\ntarget: (0, 999)", s, 640, 480, ParseMode::strict,
                                                {{KeypointRole::target, 1}});
    CHECK(k.at(KeypointRole::grasp).point.x == doctest::Approx(320.32));
    CHECK(k.at(KeypointRole::grasp).object_index == 0);
    CHECK(k.at(KeypointRole::target).object_index == 1);
    CHECK(k.at(KeypointRole::target).point.y == doctest::Approx(479.76));
}

TEST_CASE("property: render then parse recovers normalized coordinates") {
    Rng rng(77);
    const TaskSchema full = *find_builtin_schema("table_sweeping");
    for (int trial = 0; trial < 500; ++trial) {
        const int w = 1 + static_cast<int>(rng.below(2000));
        const int h = 1 + static_cast<int>(rng.below(2000));
        KeypointSet k;
        for (auto role : kAllRoles) k.add(role, {{rng.uniform(0.0, w) * 0.999999, rng.uniform(0.0, h) * 0.999999}, 0});
        const std::string text = render_affordance_text(k, full, w, h);
        REQUIRE(render_affordance_text(k, full, w, h) == text);
        REQUIRE(parse_affordance_normalized(text, full, ParseMode::strict) == normalize_keypoints(k, w, h));
    }
}

TEST_CASE("KeypointSet refuses duplicate roles") {
    KeypointSet k;
    k.add(KeypointRole::target, {{1.0, 1.0}, 0});
    CHECK_THROWS_AS(k.add(KeypointRole::target, {{2.0, 2.0}, 0}), Error);
    k.set(KeypointRole::target, {{2.0, 2.0}, 0});
    CHECK(k.at(KeypointRole::target).point.x == 2.0);
    CHECK_THROWS_AS(k.at(KeypointRole::grasp), Error);
}

TEST_CASE("role names round-trip") {
    for (auto role : kAllRoles) CHECK(role_from_string(to_string(role)) == role);
    CHECK_FALSE(role_from_string("handle").has_value());
}

TEST_CASE("prompt template fills instruction and roles") {
    const auto t = PromptTemplate::default_template();
    const std::string p = t.render("Close the drawer.", *find_builtin_schema("drawer_closing"));
    CHECK(p.find("Close the drawer.") != std::string::npos);
    CHECK(p.find("function") != std::string::npos);
    CHECK(p.find("{instruction}") == std::string::npos);
    CHECK(p.find("{roles}") == std::string::npos);
}

TEST_CASE("instruction templates fill descriptor slots") {
    const TaskSchema s = *find_builtin_schema("table_sweeping");
    CHECK(s.render_instruction({"brush", "snack package"}) == "Use the brush to sweep the snack package.");
}

}  // TEST_SUITE
