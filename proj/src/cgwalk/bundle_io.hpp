#pragma once

#include <filesystem>

#include "cgwalk/scene.hpp"

namespace cgwalk {

// A scene bundle on disk is a directory of whitespace-separated ASCII files
// ('#' comment lines allowed):
//   points.txt       one "x y z" per line
//   semantic.txt     one integer per line
//   offsets.txt      one "dx dy dz" per line
//   weak.txt         one "point_index semantic_id instance_id" per line
//   supervoxels.txt  one integer per line (optional)
//   gt_instance.txt  one integer per line, -1 = no instance (optional)
//   gt_semantic.txt  one integer per line (optional)
//   meta.json        scene name + foreground class list
// Floats are written in shortest round-trip form, so save/load is exact.

SceneBundle load_bundle(const std::filesystem::path& dir);
void save_bundle(const SceneBundle& scene, const std::filesystem::path& dir);

// Predictions live next to each other as pred_instance.txt (one id per line)
// and pred_confidence.txt (one "instance_id confidence" per line).
void save_labeling(const InstanceLabeling& labeling, const std::filesystem::path& dir);
InstanceLabeling load_labeling(const std::filesystem::path& dir, int expect_n);

}  // namespace cgwalk
