#include "cgwalk/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <tuple>

#include "cgwalk/error.hpp"
#include "cgwalk/util.hpp"

namespace cgwalk {

void SceneSpec::validate() const {
  if (classes < 1) fail(ErrorCode::kConfig, "classes must be at least 1");
  if (instances_per_class.lo < 1 || instances_per_class.hi < instances_per_class.lo)
    fail(ErrorCode::kConfig, "instances_per_class range is empty");
  if (points_per_instance.lo < 1 || points_per_instance.hi < points_per_instance.lo)
    fail(ErrorCode::kConfig, "points_per_instance range is empty");
  if (gap < 0.0) fail(ErrorCode::kConfig, "gap must be non-negative");
  if (!(radius_range.lo > 0.0) || radius_range.hi < radius_range.lo)
    fail(ErrorCode::kConfig, "radius_range must be positive and non-empty");
  if (!(aspect_range.lo > 0.0) || aspect_range.hi < aspect_range.lo)
    fail(ErrorCode::kConfig, "aspect_range must be positive and non-empty");
  if (offset_quality < 0.0 || offset_quality > 1.0)
    fail(ErrorCode::kConfig, "offset_quality must lie in [0, 1]");
  if (offset_noise < 0.0) fail(ErrorCode::kConfig, "offset_noise must be non-negative");
  if (semantic_flip_rate < 0.0 || semantic_flip_rate >= 1.0)
    fail(ErrorCode::kConfig, "semantic_flip_rate must lie in [0, 1)");
  if (!(supervoxel_cell > 0.0)) fail(ErrorCode::kConfig, "supervoxel_cell must be positive");
  if (!(arena_edge > 0.0)) fail(ErrorCode::kConfig, "arena_edge must be positive");
}

std::vector<SyntheticInstance> collect_instances(const PointCloud& cloud,
                                                 const std::vector<int>& gt_instance_ids,
                                                 const std::vector<int>& gt_semantic_ids) {
  if (gt_instance_ids.size() != cloud.points.size() ||
      gt_semantic_ids.size() != cloud.points.size())
    fail(ErrorCode::kLengthMismatch, "ground-truth arrays do not match point count");
  std::map<int, SyntheticInstance> by_id;
  for (std::size_t i = 0; i < gt_instance_ids.size(); ++i) {
    const int id = gt_instance_ids[i];
    if (id < 0) continue;
    auto& inst = by_id[id];
    if (inst.point_indices.empty()) {
      inst.instance_id = id;
      inst.class_id = gt_semantic_ids[i];
    } else if (inst.class_id != gt_semantic_ids[i]) {
      fail(ErrorCode::kBadArgument,
           "instance " + std::to_string(id) + " spans multiple classes");
    }
    inst.point_indices.push_back(static_cast<int>(i));
    inst.centroid += cloud.points[i];
  }
  std::vector<SyntheticInstance> out;
  out.reserve(by_id.size());
  for (auto& [id, inst] : by_id) {
    inst.centroid /= static_cast<double>(inst.point_indices.size());
    out.push_back(std::move(inst));
  }
  return out;
}

OffsetField simulate_offsets(const PointCloud& cloud, const std::vector<int>& gt_instance_ids,
                             const std::vector<int>& gt_semantic_ids, double quality,
                             double sigma_n, std::uint64_t rng_seed) {
  if (quality < 0.0 || quality > 1.0)
    fail(ErrorCode::kBadArgument, "offset quality must lie in [0, 1]");
  if (sigma_n < 0.0) fail(ErrorCode::kBadArgument, "offset noise must be non-negative");
  const auto instances = collect_instances(cloud, gt_instance_ids, gt_semantic_ids);
  std::map<int, Vec3> centroid_of;
  for (const auto& inst : instances) centroid_of[inst.instance_id] = inst.centroid;

  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  OffsetField out;
  out.offsets.assign(cloud.points.size(), Vec3::Zero());
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const int id = gt_instance_ids[i];
    if (id < 0) continue;
    Vec3 d = quality * (centroid_of.at(id) - cloud.points[i]);
    if (sigma_n > 0.0) d += sigma_n * Vec3(gauss(rng), gauss(rng), gauss(rng));
    out.offsets[i] = d;
  }
  return out;
}

std::vector<int> simulate_semantics(const std::vector<int>& gt_semantic_ids,
                                    const std::vector<int>& classes, double flip_rate,
                                    std::uint64_t rng_seed) {
  if (flip_rate < 0.0 || flip_rate >= 1.0)
    fail(ErrorCode::kBadArgument, "flip rate must lie in [0, 1)");
  std::vector<int> sorted_classes = classes;
  std::sort(sorted_classes.begin(), sorted_classes.end());
  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<int> out = gt_semantic_ids;
  if (sorted_classes.size() < 2 || flip_rate == 0.0) return out;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!std::binary_search(sorted_classes.begin(), sorted_classes.end(), out[i])) continue;
    if (unit(rng) >= flip_rate) continue;
    std::uniform_int_distribution<std::size_t> pick(0, sorted_classes.size() - 2);
    std::size_t j = pick(rng);
    // Skip over the point's own class in the sorted list.
    const auto self = std::lower_bound(sorted_classes.begin(), sorted_classes.end(), out[i]) -
                      sorted_classes.begin();
    if (j >= static_cast<std::size_t>(self)) ++j;
    out[i] = sorted_classes[j];
  }
  return out;
}

WeakAnnotations sample_weak_annotations(const std::vector<SyntheticInstance>& instances,
                                        std::uint64_t rng_seed) {
  std::mt19937_64 rng(rng_seed);
  WeakAnnotations out;
  for (const auto& inst : instances) {
    if (inst.point_indices.empty())
      fail(ErrorCode::kBadArgument,
           "instance " + std::to_string(inst.instance_id) + " has no points");
    std::uniform_int_distribution<std::size_t> pick(0, inst.point_indices.size() - 1);
    WeakAnnotation a;
    a.point_index = inst.point_indices[pick(rng)];
    a.semantic_id = inst.class_id;
    a.instance_id = inst.instance_id;
    out.entries.push_back(a);
  }
  return out;
}

SupervoxelSegmentation grid_supervoxels(const PointCloud& cloud, double cell_size) {
  if (!(cell_size > 0.0)) fail(ErrorCode::kBadArgument, "cell_size must be positive");
  SupervoxelSegmentation out;
  out.segment_ids.assign(cloud.points.size(), -1);
  std::map<std::tuple<long, long, long>, int> cell_ids;
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const Vec3& p = cloud.points[i];
    const std::tuple<long, long, long> key{
        static_cast<long>(std::floor(p.x() / cell_size)),
        static_cast<long>(std::floor(p.y() / cell_size)),
        static_cast<long>(std::floor(p.z() / cell_size))};
    auto [it, inserted] = cell_ids.try_emplace(key, static_cast<int>(cell_ids.size()));
    out.segment_ids[i] = it->second;
  }
  return out;
}

namespace {

struct ShapeDraw {
  Vec3 semiaxes = Vec3::Zero();
  std::vector<Vec3> local_points;  // centered at the origin

  double bound() const { return semiaxes.maxCoeff(); }
};

Vec3 sample_unit_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  while (true) {
    const Vec3 v(gauss(rng), gauss(rng), gauss(rng));
    const double len = v.norm();
    if (len > 1e-12) return v / len;
  }
}

ShapeDraw draw_shape(const SceneSpec& spec, int point_count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> radius(spec.radius_range.lo, spec.radius_range.hi);
  std::uniform_real_distribution<double> aspect(spec.aspect_range.lo, spec.aspect_range.hi);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ShapeDraw shape;
  const double r = radius(rng);
  shape.semiaxes = Vec3(r * aspect(rng), r * aspect(rng), r * aspect(rng));
  shape.local_points.reserve(point_count);
  if (spec.shape == InstanceShape::kEllipsoid) {
    for (int i = 0; i < point_count; ++i) {
      const Vec3 dir = sample_unit_direction(rng);
      const double frac = std::cbrt(unit(rng));
      shape.local_points.push_back(shape.semiaxes.cwiseProduct(dir * frac));
    }
  } else {
    // Box shell: pick a face with probability proportional to its area, then
    // a uniform point on that face.
    const Vec3& h = shape.semiaxes;
    const double areas[3] = {h.y() * h.z(), h.x() * h.z(), h.x() * h.y()};
    const double total = 2.0 * (areas[0] + areas[1] + areas[2]);
    for (int i = 0; i < point_count; ++i) {
      double roll = unit(rng) * total;
      int axis = 0;
      double sign = 1.0;
      for (int a = 0; a < 3; ++a) {
        if (roll < 2.0 * areas[a]) {
          axis = a;
          sign = roll < areas[a] ? 1.0 : -1.0;
          break;
        }
        roll -= 2.0 * areas[a];
      }
      Vec3 p;
      p[axis] = sign * h[axis];
      const int u = (axis + 1) % 3;
      const int v = (axis + 2) % 3;
      p[u] = (2.0 * unit(rng) - 1.0) * h[u];
      p[v] = (2.0 * unit(rng) - 1.0) * h[v];
      shape.local_points.push_back(p);
    }
  }
  return shape;
}

struct Placed {
  Vec3 center = Vec3::Zero();
  double bound = 0.0;
};

bool fits_arena(const Vec3& center, double bound, double arena_edge) {
  const double half = arena_edge / 2.0;
  for (int a = 0; a < 3; ++a)
    if (center[a] - bound < -half || center[a] + bound > half) return false;
  return true;
}

bool clear_of(const std::vector<Placed>& placed, const Vec3& center, double bound,
              double clearance) {
  for (const auto& other : placed)
    if ((center - other.center).norm() < bound + other.bound + clearance) return false;
  return true;
}

Vec3 sample_center(const SceneSpec& spec, double bound, std::mt19937_64& rng) {
  const double half = spec.arena_edge / 2.0;
  if (bound >= half)
    fail(ErrorCode::kConfig, "instance radius exceeds the arena half-edge");
  std::uniform_real_distribution<double> coord(-half + bound, half - bound);
  return Vec3(coord(rng), coord(rng), coord(rng));
}

// Clearance kept between instances that are not a packed pair, so only the
// intended pairs compete for boundary points.
constexpr double kFarGap = 2.0;
constexpr int kMaxAttempts = 20000;

}  // namespace

SceneBundle generate_scene(const SceneSpec& spec, const std::string& name) {
  spec.validate();

  std::mt19937_64 counts_rng(hash_mix(spec.rng_seed, 1));
  std::mt19937_64 place_rng(hash_mix(spec.rng_seed, 2));
  std::mt19937_64 shape_rng(hash_mix(spec.rng_seed, 3));

  std::uniform_int_distribution<int> inst_count(spec.instances_per_class.lo,
                                                spec.instances_per_class.hi);
  std::uniform_int_distribution<int> point_count(spec.points_per_instance.lo,
                                                 spec.points_per_instance.hi);

  struct Pending {
    int class_id;
    ShapeDraw shape;
  };
  std::vector<Pending> pending;
  for (int c = 0; c < spec.classes; ++c) {
    const int k = inst_count(counts_rng);
    for (int j = 0; j < k; ++j)
      pending.push_back({c, draw_shape(spec, point_count(counts_rng), shape_rng)});
  }
  const int total = static_cast<int>(pending.size());

  std::vector<Placed> placed;
  std::vector<Vec3> centers(total);
  auto report_infeasible = [&](int done) {
    fail(ErrorCode::kBadArgument,
         "could not place instance " + std::to_string(done + 1) + " of " +
             std::to_string(total) + " in the arena; reduce instances or gap");
  };

  if (spec.packing == PackingMode::kSeparable) {
    for (int i = 0; i < total; ++i) {
      const double bound = pending[i].shape.bound();
      bool ok = false;
      for (int attempt = 0; attempt < kMaxAttempts && !ok; ++attempt) {
        const Vec3 c = sample_center(spec, bound, place_rng);
        if (!clear_of(placed, c, bound, spec.gap)) continue;
        centers[i] = c;
        placed.push_back({c, bound});
        ok = true;
      }
      if (!ok) report_infeasible(i);
    }
  } else {
    // Packed pairs inside each class; the second member is positioned so that
    // the closest cross-pair point distance is exactly the surface gap.
    int i = 0;
    while (i < total) {
      const bool has_partner = i + 1 < total && pending[i + 1].class_id == pending[i].class_id;
      if (!has_partner) {
        const double bound = pending[i].shape.bound();
        bool ok = false;
        for (int attempt = 0; attempt < kMaxAttempts && !ok; ++attempt) {
          const Vec3 c = sample_center(spec, bound, place_rng);
          if (!clear_of(placed, c, bound, kFarGap)) continue;
          centers[i] = c;
          placed.push_back({c, bound});
          ok = true;
        }
        if (!ok) report_infeasible(i);
        ++i;
        continue;
      }
      const ShapeDraw& sa = pending[i].shape;
      const ShapeDraw& sb = pending[i + 1].shape;
      bool ok = false;
      for (int attempt = 0; attempt < kMaxAttempts && !ok; ++attempt) {
        const Vec3 ca = sample_center(spec, sa.bound() + sb.bound(), place_rng);
        const Vec3 u = sample_unit_direction(place_rng);
        // Support points of each cloud along the pair axis.
        Vec3 pa = sa.local_points[0];
        for (const Vec3& p : sa.local_points)
          if (p.dot(u) > pa.dot(u)) pa = p;
        Vec3 pb = sb.local_points[0];
        for (const Vec3& p : sb.local_points)
          if (p.dot(u) < pb.dot(u)) pb = p;
        const Vec3 cb = ca + pa + spec.gap * u - pb;
        if (!fits_arena(ca, sa.bound(), spec.arena_edge)) continue;
        if (!fits_arena(cb, sb.bound(), spec.arena_edge)) continue;
        if (!clear_of(placed, ca, sa.bound(), kFarGap)) continue;
        if (!clear_of(placed, cb, sb.bound(), kFarGap)) continue;
        centers[i] = ca;
        centers[i + 1] = cb;
        placed.push_back({ca, sa.bound()});
        placed.push_back({cb, sb.bound()});
        ok = true;
      }
      if (!ok) report_infeasible(i);
      i += 2;
    }
  }

  SceneBundle scene;
  scene.name = name;
  std::vector<int> gt_instance;
  std::vector<int> gt_semantic;
  for (int i = 0; i < total; ++i) {
    for (const Vec3& p : pending[i].shape.local_points) {
      scene.cloud.points.push_back(centers[i] + p);
      gt_instance.push_back(i);
      gt_semantic.push_back(pending[i].class_id);
    }
  }

  const auto instances = collect_instances(scene.cloud, gt_instance, gt_semantic);
  std::vector<int> classes(spec.classes);
  for (int c = 0; c < spec.classes; ++c) classes[c] = c;

  scene.semantics.labels = simulate_semantics(gt_semantic, classes, spec.semantic_flip_rate,
                                              hash_mix(spec.rng_seed, 4));
  scene.semantics.foreground_classes = classes;
  scene.offsets = simulate_offsets(scene.cloud, gt_instance, gt_semantic, spec.offset_quality,
                                   spec.offset_noise, hash_mix(spec.rng_seed, 5));
  scene.weak = sample_weak_annotations(instances, hash_mix(spec.rng_seed, 6));
  scene.supervoxels = grid_supervoxels(scene.cloud, spec.supervoxel_cell);
  scene.gt_instances = std::move(gt_instance);
  scene.gt_semantics = std::move(gt_semantic);
  validate_scene(scene);
  return scene;
}

}  // namespace cgwalk
