#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cgwalk/geometry.hpp"

namespace cgwalk {

// N 3D points in meters. Index space 0..N-1 is the shared key for every
// per-point field in a scene.
struct PointCloud {
  std::vector<Vec3> points;

  int size() const { return static_cast<int>(points.size()); }
};

// Per-point class id (-1 = unknown) plus the set of ids treated as
// foreground. Which classes count as background is configuration, not
// hard-coded.
struct SemanticField {
  std::vector<int> labels;
  std::vector<int> foreground_classes;

  bool is_foreground(int class_id) const;
};

// Per-point predicted centroid shift, in meters.
struct OffsetField {
  std::vector<Vec3> offsets;
};

// One annotated point per object instance; the only supervision.
struct WeakAnnotation {
  int point_index = -1;
  int semantic_id = -1;
  int instance_id = -1;
};

struct WeakAnnotations {
  std::vector<WeakAnnotation> entries;

  // class id -> instance ids of that class, ascending.
  std::map<int, std::vector<int>> instances_by_class() const;
};

// Per-point segment id; segment ids partition the index space.
struct SupervoxelSegmentation {
  std::vector<int> segment_ids;
};

// Per-point instance id (-1 = unassigned) with optional per-instance
// confidence. Baselines and the walk engine both produce this shape so one
// evaluator serves all algorithms.
struct InstanceLabeling {
  std::vector<int> instance_ids;
  std::map<int, double> confidences;
};

// Hyperparameters of the competing random walk.
struct CgcrwParams {
  double alpha = 0.2;
  double theta = 0.5;
  double sigma = 0.3;  // meters; results are sensitive to this scale
  int t1_max = 1;
  int t2_max = 5;
  int subsample_cap = 25000;
  int dense_limit = 8192;
  double kernel_cutoff = std::exp(-4.5);  // sparse backend drops entries below this
  std::uint64_t rng_seed = 0;
  bool use_steady_state = false;  // solve the walk to its limit instead of t1 steps

  void validate() const;
};

struct SceneBundle {
  std::string name;
  PointCloud cloud;
  SemanticField semantics;
  OffsetField offsets;
  WeakAnnotations weak;
  std::optional<SupervoxelSegmentation> supervoxels;
  std::optional<std::vector<int>> gt_instances;
  std::optional<std::vector<int>> gt_semantics;

  int size() const { return cloud.size(); }
};

// Checks every cross-field invariant: matching lengths, index bounds, finite
// values, unique instance ids, weak semantic ids in the foreground set.
// Throws Error with the offending index in the message.
void validate_scene(const SceneBundle& scene);

// Initial ground-truth masks obtained by spreading each annotation over its
// supervoxel.
struct SpreadLabels {
  std::vector<int> instance_ids;  // -1 where no mask
  std::vector<int> semantic_ids;  // -1 where no mask
};

// Every point sharing a supervoxel with an annotated point receives that
// annotation's labels. A supervoxel containing several annotations is split
// by nearest annotated point (ties to the lower instance id). Without
// supervoxels only the annotated points themselves are labeled.
SpreadLabels spread_weak_labels(const SceneBundle& scene);

}  // namespace cgwalk
