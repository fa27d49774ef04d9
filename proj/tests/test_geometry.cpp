#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"

#include "forge/error.hpp"
#include "forge/geometry.hpp"
#include "forge/random.hpp"

using namespace forge;

namespace {

TransformSpec similarity(double s, double theta, double dx, double dy, PixelPoint c) {
    TransformSpec t;
    t.similarity = {s, theta, dx, dy, c};
    return t;
}

// Independent closed form: T(c + d) * R(theta) * S(s) * T(-c).
Eigen::Matrix3d homogeneous(const SimilarityParams& p) {
    Eigen::Matrix3d to_origin = Eigen::Matrix3d::Identity();
    to_origin(0, 2) = -p.center.x;
    to_origin(1, 2) = -p.center.y;
    Eigen::Matrix3d rs = Eigen::Matrix3d::Identity();
    rs(0, 0) = p.scale * std::cos(p.rotation);
    rs(0, 1) = -p.scale * std::sin(p.rotation);
    rs(1, 0) = p.scale * std::sin(p.rotation);
    rs(1, 1) = p.scale * std::cos(p.rotation);
    Eigen::Matrix3d back = Eigen::Matrix3d::Identity();
    back(0, 2) = p.center.x + p.dx;
    back(1, 2) = p.center.y + p.dy;
    return back * rs * to_origin;
}

BinaryMask square(int w, int h, int x0, int y0, int side) {
    BinaryMask m(w, h);
    for (int y = y0; y < y0 + side; ++y)
        for (int x = x0; x < x0 + side; ++x) m.set(x, y);
    return m;
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("hand-computed similarity maps") {
    const PixelPoint a = apply_to_point(similarity(1.0, M_PI / 2, 0, 0, {100, 100}), {110, 100});
    CHECK(a.x == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(a.y == doctest::Approx(110.0).epsilon(1e-12));
    const PixelPoint b = apply_to_point(similarity(2.0, 0.0, 5, -3, {0, 0}), {10, 10});
    CHECK(b.x == 25.0);
    CHECK(b.y == 17.0);
    const PixelPoint c = apply_to_point(TransformSpec::identity(), {3.25, 7.5});
    CHECK(c.x == 3.25);
    CHECK(c.y == 7.5);
}

TEST_CASE("apply_to_point matches the homogeneous-matrix oracle") {
    Rng rng(11);
    for (int i = 0; i < 2000; ++i) {
        const SimilarityParams p{rng.uniform(0.2, 3.0), rng.uniform(-M_PI, M_PI), rng.uniform(-200, 200),
                                 rng.uniform(-200, 200), {rng.uniform(0, 640), rng.uniform(0, 480)}};
        TransformSpec t;
        t.similarity = p;
        const PixelPoint q{rng.uniform(-100, 700), rng.uniform(-100, 600)};
        const Eigen::Vector3d want = homogeneous(p) * Eigen::Vector3d(q.x, q.y, 1.0);
        const PixelPoint got = apply_to_point(t, q);
        REQUIRE(std::abs(got.x - want.x()) < 1e-9);
        REQUIRE(std::abs(got.y - want.y()) < 1e-9);
    }
}

TEST_CASE("similarity inverse round-trips points") {
    Rng rng(12);
    for (int i = 0; i < 1000; ++i) {
        const TransformSpec t = similarity(rng.uniform(0.5, 2.0), rng.uniform(-1, 1), rng.uniform(-50, 50),
                                           rng.uniform(-50, 50), {rng.uniform(0, 100), rng.uniform(0, 100)});
        const PixelPoint p{rng.uniform(0, 100), rng.uniform(0, 100)};
        const PixelPoint back = apply_to_point(t.inverse(), apply_to_point(t, p));
        REQUIRE(std::abs(back.x - p.x) < 1e-6);
        REQUIRE(std::abs(back.y - p.y) < 1e-6);
        const PixelPoint pre = inverse_map(t, apply_to_point(t, p));
        REQUIRE(std::abs(pre.x - p.x) < 1e-6);
    }
}

TEST_CASE("elastic inverse_map inverts apply_to_point") {
    TransformConfig cfg;
    cfg.elastic_alpha_max = 8.0;
    Rng rng(13);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const TransformSpec t = sample_transform(cfg, seed, 160, 120, {80, 60});
        REQUIRE(t.elastic.has_value());
        for (int i = 0; i < 20; ++i) {
            const PixelPoint p{rng.uniform(10, 150), rng.uniform(10, 110)};
            const PixelPoint back = inverse_map(t, apply_to_point(t, p));
            REQUIRE(std::hypot(back.x - p.x, back.y - p.y) < 1e-3);
        }
    }
}

TEST_CASE("sample_transform is deterministic and respects collapsed ranges") {
    TransformConfig cfg;
    CHECK(sample_transform(cfg, 99, 160, 120, {50, 50}) == sample_transform(cfg, 99, 160, 120, {50, 50}));
    CHECK_FALSE(sample_transform(cfg, 99, 160, 120, {50, 50}) == sample_transform(cfg, 100, 160, 120, {50, 50}));
    const TransformSpec id = sample_transform(TransformConfig::identity(), 1234, 160, 120, {50, 50});
    CHECK(id.is_identity());
}

TEST_CASE("invalid transform configs are rejected") {
    TransformConfig cfg;
    cfg.scale_min = 0.0;
    CHECK_THROWS_AS(cfg.check(), Error);
    cfg.scale_min = 1.5;
    cfg.scale_max = 1.2;
    CHECK_THROWS_AS(sample_transform(cfg, 1, 10, 10, {5, 5}), Error);
}

TEST_CASE("sampled parameters stay in range and elastic magnitude is capped") {
    TransformConfig cfg;
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        const TransformSpec t = sample_transform(cfg, seed, 200, 100, {100, 50});
        REQUIRE(t.similarity.scale >= cfg.scale_min);
        REQUIRE(t.similarity.scale <= cfg.scale_max);
        REQUIRE(std::abs(t.similarity.rotation) <= cfg.rotation_max);
        REQUIRE(std::abs(t.similarity.dx) <= 0.15 * 200);
        REQUIRE(std::abs(t.similarity.dy) <= 0.15 * 100);
        const auto& e = *t.elastic;
        for (std::size_t i = 0; i < e.dx.size(); ++i) REQUIRE(std::hypot(e.dx[i], e.dy[i]) <= e.magnitude_alpha + 1e-9);
        for (int k = 0; k < 20; ++k) {
            const PixelPoint d = e.displacement({k * 10.0, k * 5.0});
            REQUIRE(std::hypot(d.x, d.y) <= e.magnitude_alpha + 1e-9);
        }
    }
}

TEST_CASE("sampled scale is uniform (Kolmogorov-Smirnov)") {
    TransformConfig cfg;
    cfg.elastic_alpha_max = 0.0;
    const int n = 10000;
    std::vector<double> u;
    u.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double s = sample_transform(cfg, derive_seed({7, static_cast<std::uint64_t>(i)}), 64, 64, {32, 32}).similarity.scale;
        u.push_back((s - cfg.scale_min) / (cfg.scale_max - cfg.scale_min));
    }
    std::sort(u.begin(), u.end());
    double d = 0.0;
    for (int i = 0; i < n; ++i) d = std::max({d, (i + 1.0) / n - u[i], u[i] - static_cast<double>(i) / n});
    // Critical value at alpha = 0.05 is 1.358 / sqrt(n).
    CHECK(d < 1.358 / std::sqrt(n));
}

TEST_CASE("apply_to_mask: identity and pure translation") {
    const BinaryMask m = square(40, 30, 5, 6, 8);
    CHECK(apply_to_mask(TransformSpec::identity(), m) == m);

    const BinaryMask moved = apply_to_mask(similarity(1.0, 0.0, 7, 11, {9, 10}), m);
    for (int y = 0; y < 30; ++y)
        for (int x = 0; x < 40; ++x) REQUIRE(moved.at(x, y) == m.test(x - 7, y - 11));

    // Cropped at the border.
    const BinaryMask cropped = apply_to_mask(similarity(1.0, 0.0, 30, 0, {9, 10}), m);
    CHECK(cropped.area() == 5u * 8u);
}

TEST_CASE("apply_to_mask: scale 2 on a 20x20 square against a brute-force oracle") {
    const int w = 100, h = 100;
    const BinaryMask m = square(w, h, 40, 40, 20);
    const PixelPoint c = m.centroid();
    CHECK(c.x == 50.0);
    const BinaryMask big = apply_to_mask(similarity(2.0, 0.0, 0, 0, c), m);
    // Closed form: the scaled square spans [30, 70) on both axes.
    std::size_t oracle = 0, mismatches = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double px = x + 0.5, py = y + 0.5;
            const bool inside = px >= 30.0 && px < 70.0 && py >= 30.0 && py < 70.0;
            oracle += inside;
            mismatches += inside != big.at(x, y);
        }
    CHECK(oracle == 1600u);
    CHECK(std::abs(static_cast<double>(big.area()) - 1600.0) <= 0.05 * 1600.0);
    CHECK(mismatches <= 80u);
}

TEST_CASE("apply_to_mask throws when everything leaves the frame") {
    const BinaryMask m = square(20, 20, 2, 2, 4);
    try {
        apply_to_mask(similarity(1.0, 0.0, 500, 0, {4, 4}), m);
        FAIL("expected empty_mask");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::empty_mask);
    }
    CHECK_THROWS_AS(apply_to_mask(TransformSpec::identity(), BinaryMask(5, 5)), Error);
}

TEST_CASE("apply_to_context stays under the transformed mask and in range") {
    const BinaryMask m = square(50, 50, 10, 10, 12);
    ContextImage c(50, 50, ContextKind::soft_edge);
    for (int y = 0; y < 50; ++y)
        for (int x = 0; x < 50; ++x) c.values[y * 50 + x] = m.at(x, y) ? 1.0 : 0.0;

    const TransformSpec shift = similarity(1.0, 0.0, 9, 4, {16, 16});
    const ContextImage out = apply_to_context(shift, c, m);
    const BinaryMask hm = apply_to_mask(shift, m);
    for (int y = 0; y < 50; ++y)
        for (int x = 0; x < 50; ++x) {
            const double v = out.values[y * 50 + x];
            if (!hm.at(x, y)) REQUIRE(v == 0.0);
            else REQUIRE(v == doctest::Approx(1.0).epsilon(1e-12));
        }

    const ContextImage same = apply_to_context(TransformSpec::identity(), c, m);
    for (std::size_t i = 0; i < c.values.size(); ++i) REQUIRE(std::abs(same.values[i] - c.values[i]) < 1e-6);

    Rng rng(5);
    for (int y = 0; y < 50; ++y)
        for (int x = 0; x < 50; ++x) c.values[y * 50 + x] = m.at(x, y) ? rng.unit() * 0.7 : 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const TransformSpec t = sample_transform(TransformConfig{}, seed, 50, 50, m.centroid());
        ContextImage w;
        try {
            w = apply_to_context(t, c, m);
        } catch (const Error&) {
            continue;
        }
        for (double v : w.values) REQUIRE(v <= 0.7 + 1e-6);
    }
}

TEST_CASE("compose_inpaint_region is the union") {
    const BinaryMask m = square(60, 30, 2, 2, 10);
    CHECK(compose_inpaint_region(m, TransformSpec::identity()) == m);
    const TransformSpec far = similarity(1.0, 0.0, 30, 0, {7, 7});
    CHECK(compose_inpaint_region(m, far).area() == 2 * m.area());

    Rng rng(3);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const TransformSpec t = sample_transform(TransformConfig{}, seed, 60, 30, m.centroid());
        BinaryMask hm;
        try {
            hm = apply_to_mask(t, m);
        } catch (const Error&) {
            continue;
        }
        const BinaryMask region = compose_inpaint_region(m, t);
        for (int y = 0; y < 30; ++y)
            for (int x = 0; x < 60; ++x) REQUIRE(region.at(x, y) == (m.at(x, y) || hm.at(x, y)));
    }
}

TEST_CASE("check_placement verdicts") {
    const BinaryMask a = square(80, 40, 5, 5, 10);
    const BinaryMask b = square(80, 40, 50, 5, 10);
    CHECK(check_placement(similarity(1.0, 0.1, 3, 2, a.centroid()), a, {}, 2).accepted);
    CHECK_FALSE(check_placement(similarity(1.0, 0.0, 45, 0, a.centroid()), a, {b}, 2).accepted);
    // One column short of touching b, but inside the margin.
    CHECK_FALSE(check_placement(similarity(1.0, 0.0, 34, 0, a.centroid()), a, {b}, 2).accepted);
    CHECK(check_placement(similarity(1.0, 0.0, 34, 0, a.centroid()), a, {b}, 0).accepted);
    const PlacementVerdict out = check_placement(similarity(1.0, 0.0, -6, 0, a.centroid()), a, {}, 0);
    CHECK_FALSE(out.accepted);
    CHECK(out.reason.find("frame") != std::string::npos);
}

TEST_CASE("property: keypoints inside a mask stay inside the transformed mask") {
    Rng rng(21);
    int trials = 0, misses = 0;
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
        const int x0 = 20 + static_cast<int>(rng.below(60)), y0 = 20 + static_cast<int>(rng.below(40));
        const BinaryMask m = square(160, 120, x0, y0, 6 + static_cast<int>(rng.below(20)));
        const TransformSpec t = sample_transform(TransformConfig{}, seed, 160, 120, m.centroid());
        BinaryMask hm;
        try {
            hm = apply_to_mask(t, m);
        } catch (const Error&) {
            continue;
        }
        for (int k = 0; k < 10; ++k) {
            const PixelPoint p{x0 + rng.unit() * 6, y0 + rng.unit() * 6};
            const PixelPoint q = apply_to_point(t, p);
            if (!in_bounds(q, 160, 120)) continue;
            ++trials;
            bool near = false;
            for (int dy = -2; dy <= 2 && !near; ++dy)
                for (int dx = -2; dx <= 2 && !near; ++dx) near = hm.test(static_cast<int>(q.x) + dx, static_cast<int>(q.y) + dy);
            misses += !near;
        }
    }
    CHECK(trials > 2000);
    CHECK(misses == 0);
}

}  // TEST_SUITE
