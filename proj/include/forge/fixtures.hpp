#pragma once

#include <cstdint>
#include <string>

#include "forge/dataset.hpp"

namespace forge {

struct FixtureOptions {
    int count = 50;
    int width = 160;
    int height = 120;
    std::uint64_t seed = 2024;
    // The last `novel_count` scenes are tagged object_set "novel", the rest "seen".
    int novel_count = 10;
};

// Procedural table-sweeping scenes: a brush (handle + bristle block) and a
// snack package on a textured table, with masks, depth and all five keypoints
// (grasp/function on the brush, target/pre/post-contact bound to the package).
// Ids are "human-000", "human-001", ...
void write_sweeping_fixtures(DatasetStore& store, const FixtureOptions& opts = {});

// One scene, for tests that need images without a store.
struct FixtureScene {
    SceneRecord record;
    SceneAssets assets;
};
FixtureScene make_sweeping_scene(int index, const FixtureOptions& opts = {});

}  // namespace forge
