#pragma once

#include <string>
#include <vector>

#include "cgwalk/scene.hpp"

namespace cgwalk {

enum class BaselineAlgorithm { kKmeans, kBfs };
enum class CoordinateMode { kOriginal, kShifted };

struct BaselineParams {
  BaselineAlgorithm algorithm = BaselineAlgorithm::kKmeans;
  CoordinateMode coordinates = CoordinateMode::kShifted;
  double bfs_radius = 0.03;   // meters
  int bfs_min_points = 50;
  int kmeans_max_iters = 100;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

// Lloyd's algorithm seeded at the given points. Nearest-centroid ties go to
// the lowest cluster id; a cluster that loses all points keeps its previous
// centroid. Stops when assignments stabilize or after max_iters rounds.
std::vector<int> kmeans_cluster(const std::vector<Vec3>& coords, int k,
                                const std::vector<int>& init_points, int max_iters);

// Connected components of the radius-r neighbor graph. Components smaller
// than min_points map to -1. Each surviving component takes the majority weak
// instance id among its members (ties to the lowest id); components without
// any weak-labeled member get fresh ids above the largest weak id, handed out
// in order of each component's lowest member index.
std::vector<int> bfs_cluster(const std::vector<Vec3>& coords, double radius, int min_points,
                             const std::vector<int>& weak_ids);

// Runs the chosen baseline per foreground class and assembles a scene-level
// labeling in the same shape the walk produces. Baselines have no notion of
// walk mass, so every emitted instance gets confidence 1.
InstanceLabeling segment_scene_baseline(const SceneBundle& scene, const BaselineParams& params,
                                        std::vector<std::string>* warnings = nullptr);

}  // namespace cgwalk
