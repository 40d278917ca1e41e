#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cgwalk/scene.hpp"

namespace cgwalk {

enum class InstanceShape { kEllipsoid, kBoxShell };
enum class PackingMode { kSeparable, kPacked };

struct IntRange {
  int lo = 1;
  int hi = 1;
};

struct DoubleRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct SceneSpec {
  int classes = 2;
  IntRange instances_per_class{2, 2};
  IntRange points_per_instance{200, 200};
  InstanceShape shape = InstanceShape::kEllipsoid;
  PackingMode packing = PackingMode::kSeparable;
  double gap = 0.5;                    // meters of clear space between surfaces
  DoubleRange radius_range{0.2, 0.3};  // base semiaxis, meters
  DoubleRange aspect_range{1.0, 1.0};  // per-axis multiplier on the base radius
  double offset_quality = 1.0;         // q in [0,1]
  double offset_noise = 0.0;           // sigma_n, meters
  double semantic_flip_rate = 0.0;
  double supervoxel_cell = 0.1;  // meters
  double arena_edge = 8.0;       // cube edge, meters
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct SyntheticInstance {
  int class_id = -1;
  int instance_id = -1;
  std::vector<int> point_indices;
  Vec3 centroid = Vec3::Zero();  // arithmetic mean of the member points
};

// Groups points by ground-truth instance id and computes exact centroids.
std::vector<SyntheticInstance> collect_instances(const PointCloud& cloud,
                                                 const std::vector<int>& gt_instance_ids,
                                                 const std::vector<int>& gt_semantic_ids);

// d_i = q * (centroid_i - x_i) + noise, with per-component Gaussian noise of
// scale sigma_n. Points without a ground-truth instance get zero offsets.
OffsetField simulate_offsets(const PointCloud& cloud, const std::vector<int>& gt_instance_ids,
                             const std::vector<int>& gt_semantic_ids, double quality,
                             double sigma_n, std::uint64_t rng_seed);

// Keeps each point's ground-truth class with probability 1 - flip_rate, else
// resamples uniformly from the other classes in `classes`.
std::vector<int> simulate_semantics(const std::vector<int>& gt_semantic_ids,
                                    const std::vector<int>& classes, double flip_rate,
                                    std::uint64_t rng_seed);

// One uniformly chosen point per ground-truth instance, carrying that
// instance's class and id.
WeakAnnotations sample_weak_annotations(const std::vector<SyntheticInstance>& instances,
                                        std::uint64_t rng_seed);

// Segment id per point: index of the occupied voxel of edge cell_size that
// contains it, numbered by first occurrence.
SupervoxelSegmentation grid_supervoxels(const PointCloud& cloud, double cell_size);

// Full scene: places instances (packed mode puts same-class pairs at surface
// gap exactly `gap`), samples per-instance point clouds, then simulates
// offsets, semantics, weak annotations, and supervoxels. Deterministic in
// rng_seed. Fails when the arena cannot fit the requested instances.
SceneBundle generate_scene(const SceneSpec& spec, const std::string& name = "scene");

}  // namespace cgwalk
