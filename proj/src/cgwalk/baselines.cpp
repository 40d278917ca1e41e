#include "cgwalk/baselines.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "cgwalk/error.hpp"
#include "cgwalk/geometry.hpp"
#include "cgwalk/walk.hpp"

namespace cgwalk {

void BaselineParams::validate() const {
  if (!(bfs_radius > 0.0)) fail(ErrorCode::kConfig, "bfs_radius must be positive");
  if (bfs_min_points < 0) fail(ErrorCode::kConfig, "bfs_min_points must be non-negative");
  if (kmeans_max_iters < 1) fail(ErrorCode::kConfig, "kmeans_max_iters must be at least 1");
}

std::vector<int> kmeans_cluster(const std::vector<Vec3>& coords, int k,
                                const std::vector<int>& init_points, int max_iters) {
  const int n = static_cast<int>(coords.size());
  if (k < 1) fail(ErrorCode::kBadArgument, "k must be at least 1");
  if (k > n) fail(ErrorCode::kBadArgument, "k exceeds the number of points");
  if (static_cast<int>(init_points.size()) != k)
    fail(ErrorCode::kBadArgument, "need exactly one init point per cluster");
  if (max_iters < 1) fail(ErrorCode::kBadArgument, "max_iters must be at least 1");

  std::vector<Vec3> centroids(k);
  for (int j = 0; j < k; ++j) {
    const int p = init_points[j];
    if (p < 0 || p >= n) fail(ErrorCode::kIndexOutOfRange, "init point index out of range");
    centroids[j] = coords[p];
  }

  std::vector<int> assign(n, -1);
  for (int it = 0; it < max_iters; ++it) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = (coords[i] - centroids[0]).squaredNorm();
      for (int j = 1; j < k; ++j) {
        const double d = (coords[i] - centroids[j]).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<Vec3> sums(k, Vec3::Zero());
    std::vector<int> counts(k, 0);
    for (int i = 0; i < n; ++i) {
      sums[assign[i]] += coords[i];
      counts[assign[i]] += 1;
    }
    for (int j = 0; j < k; ++j)
      if (counts[j] > 0) centroids[j] = sums[j] / counts[j];
  }
  return assign;
}

std::vector<int> bfs_cluster(const std::vector<Vec3>& coords, double radius, int min_points,
                             const std::vector<int>& weak_ids) {
  const int n = static_cast<int>(coords.size());
  if (!(radius > 0.0)) fail(ErrorCode::kBadArgument, "radius must be positive");
  if (weak_ids.size() != coords.size())
    fail(ErrorCode::kLengthMismatch, "weak id array does not match point count");
  std::vector<int> out(n, -1);
  if (n == 0) return out;

  SpatialGrid grid(coords, radius);
  std::vector<int> component(n, -1);
  std::vector<std::vector<int>> members;
  std::vector<int> hits;
  for (int start = 0; start < n; ++start) {
    if (component[start] >= 0) continue;
    const int comp = static_cast<int>(members.size());
    members.push_back({});
    component[start] = comp;
    std::queue<int> frontier;
    frontier.push(start);
    while (!frontier.empty()) {
      const int i = frontier.front();
      frontier.pop();
      members[comp].push_back(i);
      grid.query_radius(coords[i], radius, hits);
      for (int j : hits) {
        if (component[j] < 0) {
          component[j] = comp;
          frontier.push(j);
        }
      }
    }
  }

  int next_fresh = 0;
  for (int id : weak_ids) next_fresh = std::max(next_fresh, id + 1);
  // Components were discovered in order of their lowest member index, so
  // fresh ids increase with that index.
  for (const auto& group : members) {
    if (static_cast<int>(group.size()) < min_points) continue;
    std::map<int, int> votes;
    for (int i : group)
      if (weak_ids[i] >= 0) votes[weak_ids[i]] += 1;
    int label;
    if (votes.empty()) {
      label = next_fresh++;
    } else {
      label = votes.begin()->first;
      int best = votes.begin()->second;
      for (const auto& [id, cnt] : votes)
        if (cnt > best) {
          best = cnt;
          label = id;
        }
    }
    for (int i : group) out[i] = label;
  }
  return out;
}

InstanceLabeling segment_scene_baseline(const SceneBundle& scene, const BaselineParams& params,
                                        std::vector<std::string>* warnings) {
  params.validate();
  validate_scene(scene);
  const std::size_t n = scene.cloud.size();

  const SpreadLabels spread = spread_weak_labels(scene);
  const std::vector<int> wsem = semantics_with_mask_override(scene, spread);
  const auto by_class = scene.weak.instances_by_class();

  InstanceLabeling out;
  out.instance_ids.assign(n, -1);

  int scene_fresh = 0;
  for (const auto& entry : scene.weak.entries)
    scene_fresh = std::max(scene_fresh, entry.instance_id + 1);

  std::vector<int> classes(scene.semantics.foreground_classes.begin(),
                           scene.semantics.foreground_classes.end());
  std::sort(classes.begin(), classes.end());

  for (int cls : classes) {
    std::vector<int> members;
    for (std::size_t i = 0; i < n; ++i)
      if (wsem[i] == cls) members.push_back(static_cast<int>(i));
    if (members.empty()) continue;

    auto it = by_class.find(cls);
    if (it == by_class.end() || it->second.empty()) {
      if (warnings)
        warnings->push_back("foreground class " + std::to_string(cls) +
                            " has no weak annotations; its points stay unassigned");
      continue;
    }
    const std::vector<int>& ids = it->second;

    std::vector<Vec3> coords;
    coords.reserve(members.size());
    for (int g : members) {
      Vec3 c = scene.cloud.points[g];
      if (params.coordinates == CoordinateMode::kShifted) c += scene.offsets.offsets[g];
      coords.push_back(c);
    }

    if (params.algorithm == BaselineAlgorithm::kKmeans) {
      // One annotated point per instance, ordered by instance id, so cluster
      // j is instance ids[j].
      std::unordered_map<int, int> local_of;
      for (std::size_t loc = 0; loc < members.size(); ++loc)
        local_of[members[loc]] = static_cast<int>(loc);
      std::vector<int> init;
      init.reserve(ids.size());
      for (int id : ids) {
        int point_index = -1;
        for (const auto& entry : scene.weak.entries)
          if (entry.instance_id == id) point_index = entry.point_index;
        auto lit = local_of.find(point_index);
        if (lit == local_of.end())
          fail(ErrorCode::kInternal, "annotated point missing from its class group");
        init.push_back(lit->second);
      }
      const std::vector<int> assign = kmeans_cluster(
          coords, static_cast<int>(ids.size()), init, params.kmeans_max_iters);
      for (std::size_t loc = 0; loc < members.size(); ++loc)
        out.instance_ids[members[loc]] = ids[assign[loc]];
    } else {
      std::vector<int> mask;
      mask.reserve(members.size());
      std::unordered_set<int> id_set(ids.begin(), ids.end());
      for (int g : members) {
        const int sid = spread.instance_ids[g];
        mask.push_back(sid >= 0 && id_set.count(sid) ? sid : -1);
      }
      std::vector<int> assign =
          bfs_cluster(coords, params.bfs_radius, params.bfs_min_points, mask);
      // Fresh ids from bfs_cluster are only unique within the class; remap
      // them onto the scene-wide counter.
      std::unordered_map<int, int> remap;
      for (std::size_t loc = 0; loc < members.size(); ++loc) {
        int id = assign[loc];
        if (id < 0) continue;
        if (!id_set.count(id)) {
          auto [rit, inserted] = remap.try_emplace(id, scene_fresh);
          if (inserted) ++scene_fresh;
          id = rit->second;
        }
        out.instance_ids[members[loc]] = id;
      }
    }
  }

  std::set<int> used;
  for (int id : out.instance_ids)
    if (id >= 0) used.insert(id);
  for (int id : used) out.confidences[id] = 1.0;
  return out;
}

}  // namespace cgwalk
