#include <cmath>
#include <fstream>
#include <functional>

#include "doctest.h"

#include "forge/config.hpp"
#include "forge/error.hpp"
#include "support.hpp"

using namespace forge;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no error thrown");
    return ErrorKind::invalid_argument;
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("scalars, arrays and comments") {
    const Config c = Config::parse(R"(# run settings
[synthesis]
n = 500          # records
seed = 7
context = "depth"
failure_budget = 0.1
independent_per_object = false
id_prefix = "syn \"a\"\tb"

[plan]
workspace_min = [-0.5, -0.5, 0]
tags = ["a", "b#c"]
)");
    CHECK(c.get_int("synthesis.n") == 500);
    CHECK(c.get_double("synthesis.n") == 500.0);
    CHECK(c.get_string("synthesis.context") == "depth");
    CHECK(c.get_double("synthesis.failure_budget") == 0.1);
    CHECK(c.get_bool("synthesis.independent_per_object") == false);
    CHECK(c.get_string("synthesis.id_prefix") == "syn \"a\"\tb");
    CHECK(c.get_doubles("plan.workspace_min") == std::vector<double>{-0.5, -0.5, 0.0});
    CHECK(c.get_strings("plan.tags") == std::vector<std::string>{"a", "b#c"});
    CHECK_FALSE(c.get_int("synthesis.missing").has_value());
    CHECK(c.keys().size() == 8);

    CHECK(kind_of([&] { c.get_int("synthesis.context"); }) == ErrorKind::invalid_argument);
    CHECK(kind_of([&] { c.get_string("plan.tags"); }) == ErrorKind::invalid_argument);
    CHECK(kind_of([&] { c.get_doubles("plan.tags"); }) == ErrorKind::invalid_argument);
}

TEST_CASE("syntax errors carry a location") {
    for (const char* bad : {"[synthesis\nn = 1", "n 1", "n = ", "n = \"open", "n = [1, 2", "n = 1.2.3", "= 4"}) {
        try {
            Config::parse(bad);
            FAIL("accepted: " << bad);
        } catch (const ParseError& e) {
            CHECK(e.kind() == ErrorKind::unparseable);
        }
    }
    CHECK(kind_of([] { Config::parse("a = 1\na = 2"); }) == ErrorKind::duplicate_role);
}

TEST_CASE("apply overrides defaults and rejects unknown keys") {
    const Config c = Config::parse(R"(
[transform]
rotation_max_deg = 45
elastic_grid = 4
[synthesis]
n = 12
workers = 3
context = "seg_mask"
[service]
base_url = "http://10.0.0.2:9000"
max_retries = 5
[plan]
clearance = 0.2
workspace_max = [2, 2, 2]
depth_window = 7
[augment]
hflip = true
replicas = 3
)");
    SynthesisConfig s;
    apply_synthesis(c, s);
    CHECK(s.target_size == 12);
    CHECK(s.workers == 3);
    CHECK(s.context_kind == ContextKind::seg_mask);
    CHECK(s.transform.rotation_max == doctest::Approx(M_PI / 4));
    CHECK(s.transform.elastic_grid == 4);
    CHECK(s.transform.scale_min == TransformConfig{}.scale_min);

    ServiceEndpoint e;
    apply_service(c, e);
    CHECK(e.base_url == "http://10.0.0.2:9000");
    CHECK(e.max_retries == 5);
    CHECK(e.timeout_s == ServiceEndpoint{}.timeout_s);

    PlanConfig p;
    apply_plan(c, p);
    CHECK(p.clearance == 0.2);
    CHECK(p.workspace_max == Eigen::Vector3d(2, 2, 2));
    CHECK(p.depth_window == 7);

    AugmentationConfig a;
    apply_augmentation(c, a);
    CHECK(a.hflip);
    CHECK(a.replicas == 3);

    SynthesisConfig s2;
    CHECK(kind_of([&] { apply_synthesis(Config::parse("[synthesis]\nsamples = 3"), s2); }) == ErrorKind::invalid_argument);
    PlanConfig p2;
    CHECK(kind_of([&] { apply_plan(Config::parse("[plan]\ndepth_window = 4"), p2); }) == ErrorKind::invalid_argument);
    CHECK(kind_of([&] { apply_plan(Config::parse("[plan]\nworkspace_min = [0, 0]"), p2); }) == ErrorKind::invalid_argument);
    ServiceEndpoint e2;
    CHECK(kind_of([&] { apply_service(Config::parse("[service]\ntimeout_s = 0"), e2); }) == ErrorKind::invalid_argument);
}

TEST_CASE("load reads a file") {
    forge::test::TempDir dir("cfg");
    {
        std::ofstream f(dir / "run.toml");
        f << "[synthesis]\nn = 3\n";
    }
    CHECK(Config::load(dir / "run.toml").get_int("synthesis.n") == 3);
    CHECK_THROWS_AS(Config::load(dir / "missing.toml"), Error);
}

}
