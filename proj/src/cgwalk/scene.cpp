#include "cgwalk/scene.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <unordered_map>

#include "cgwalk/error.hpp"

namespace cgwalk {

bool SemanticField::is_foreground(int class_id) const {
  return std::find(foreground_classes.begin(), foreground_classes.end(), class_id) !=
         foreground_classes.end();
}

std::map<int, std::vector<int>> WeakAnnotations::instances_by_class() const {
  std::map<int, std::vector<int>> result;
  for (const auto& e : entries) {
    result[e.semantic_id].push_back(e.instance_id);
  }
  for (auto& [cls, ids] : result) {
    std::sort(ids.begin(), ids.end());
  }
  return result;
}

void CgcrwParams::validate() const {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    fail(ErrorCode::kConfig, "alpha must be in [0,1)");
  }
  if (!(theta > 0.0 && theta <= 1.0)) {
    fail(ErrorCode::kConfig, "theta must be in (0,1]");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    fail(ErrorCode::kConfig, "sigma must be positive");
  }
  if (t1_max < 0 || t2_max < 0) {
    fail(ErrorCode::kConfig, "iteration counts must be >= 0");
  }
  if (subsample_cap < 1) {
    fail(ErrorCode::kConfig, "subsample_cap must be >= 1");
  }
  if (dense_limit < 1) {
    fail(ErrorCode::kConfig, "dense_limit must be >= 1");
  }
  if (!(kernel_cutoff >= 0.0 && kernel_cutoff < 1.0)) {
    fail(ErrorCode::kConfig, "kernel_cutoff must be in [0,1)");
  }
}

namespace {

void check_length(std::size_t got, std::size_t want, const char* field) {
  if (got != want) {
    fail(ErrorCode::kLengthMismatch,
         std::string(field) + " has length " + std::to_string(got) + ", expected " +
             std::to_string(want));
  }
}

}  // namespace

void validate_scene(const SceneBundle& scene) {
  const int n = scene.size();
  if (n < 1) {
    fail(ErrorCode::kBadArgument, "point cloud is empty");
  }
  for (int i = 0; i < n; ++i) {
    if (!scene.cloud.points[i].allFinite()) {
      fail(ErrorCode::kNonFinite, "non-finite coordinate at point " + std::to_string(i));
    }
  }
  check_length(scene.semantics.labels.size(), n, "semantic field");
  check_length(scene.offsets.offsets.size(), n, "offset field");
  for (int i = 0; i < n; ++i) {
    if (!scene.offsets.offsets[i].allFinite()) {
      fail(ErrorCode::kNonFinite, "non-finite offset at point " + std::to_string(i));
    }
  }
  if (scene.supervoxels) {
    check_length(scene.supervoxels->segment_ids.size(), n, "supervoxel segmentation");
    for (int i = 0; i < n; ++i) {
      if (scene.supervoxels->segment_ids[i] < 0) {
        fail(ErrorCode::kIndexOutOfRange,
             "negative supervoxel id at point " + std::to_string(i));
      }
    }
  }
  if (scene.gt_instances) {
    check_length(scene.gt_instances->size(), n, "ground-truth instances");
  }
  if (scene.gt_semantics) {
    check_length(scene.gt_semantics->size(), n, "ground-truth semantics");
  }

  std::set<int> seen_points;
  std::set<int> seen_instances;
  for (std::size_t e = 0; e < scene.weak.entries.size(); ++e) {
    const auto& entry = scene.weak.entries[e];
    if (entry.point_index < 0 || entry.point_index >= n) {
      fail(ErrorCode::kIndexOutOfRange,
           "weak annotation " + std::to_string(e) + " references point " +
               std::to_string(entry.point_index) + " outside 0.." + std::to_string(n - 1));
    }
    if (!seen_points.insert(entry.point_index).second) {
      fail(ErrorCode::kBadArgument,
           "weak annotation " + std::to_string(e) + " repeats point " +
               std::to_string(entry.point_index));
    }
    if (entry.instance_id < 0) {
      fail(ErrorCode::kIndexOutOfRange,
           "weak annotation " + std::to_string(e) + " has negative instance id");
    }
    if (!seen_instances.insert(entry.instance_id).second) {
      fail(ErrorCode::kDuplicateInstanceId,
           "weak annotation " + std::to_string(e) + " repeats instance id " +
               std::to_string(entry.instance_id));
    }
    if (!scene.semantics.is_foreground(entry.semantic_id)) {
      fail(ErrorCode::kBadArgument,
           "weak annotation " + std::to_string(e) + " has semantic id " +
               std::to_string(entry.semantic_id) + " outside the foreground set");
    }
  }
}

SpreadLabels spread_weak_labels(const SceneBundle& scene) {
  const int n = scene.size();
  SpreadLabels spread;
  spread.instance_ids.assign(n, -1);
  spread.semantic_ids.assign(n, -1);

  if (!scene.supervoxels) {
    for (const auto& e : scene.weak.entries) {
      spread.instance_ids[e.point_index] = e.instance_id;
      spread.semantic_ids[e.point_index] = e.semantic_id;
    }
    return spread;
  }

  const auto& seg = scene.supervoxels->segment_ids;
  std::unordered_map<int, std::vector<const WeakAnnotation*>> by_segment;
  for (const auto& e : scene.weak.entries) {
    by_segment[seg[e.point_index]].push_back(&e);
  }

  for (int i = 0; i < n; ++i) {
    auto it = by_segment.find(seg[i]);
    if (it == by_segment.end()) {
      continue;
    }
    const auto& anns = it->second;
    const WeakAnnotation* best = anns.front();
    if (anns.size() > 1) {
      // Shared supervoxel: split by nearest annotated point, ties to the
      // lower instance id.
      double best_d2 = std::numeric_limits<double>::infinity();
      best = nullptr;
      for (const WeakAnnotation* a : anns) {
        const double d2 = (scene.cloud.points[i] - scene.cloud.points[a->point_index]).squaredNorm();
        if (best == nullptr || d2 < best_d2 ||
            (d2 == best_d2 && a->instance_id < best->instance_id)) {
          best_d2 = d2;
          best = a;
        }
      }
    }
    spread.instance_ids[i] = best->instance_id;
    spread.semantic_ids[i] = best->semantic_id;
  }

  // Annotated points always keep their own labels.
  for (const auto& e : scene.weak.entries) {
    spread.instance_ids[e.point_index] = e.instance_id;
    spread.semantic_ids[e.point_index] = e.semantic_id;
  }
  return spread;
}

}  // namespace cgwalk
