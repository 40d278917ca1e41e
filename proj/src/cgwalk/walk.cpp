#include "cgwalk/walk.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "cgwalk/error.hpp"
#include "cgwalk/geometry.hpp"
#include "cgwalk/util.hpp"

namespace cgwalk {

Eigen::VectorXd init_seed_vector(const std::vector<int>& seed_set, int n) {
  if (n <= 0) fail(ErrorCode::kBadArgument, "seed vector size must be positive");
  if (seed_set.empty()) fail(ErrorCode::kBadArgument, "seed set must not be empty");
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  const double mass = 1.0 / static_cast<double>(seed_set.size());
  for (int s : seed_set) {
    if (s < 0 || s >= n) fail(ErrorCode::kIndexOutOfRange, "seed index out of range");
    b[s] = mass;
  }
  return b;
}

Eigen::VectorXd propagate_step(const TransitionMatrix& A, const Eigen::VectorXd& b_t,
                               const Eigen::VectorXd& b0, double alpha) {
  if (b_t.size() != A.size() || b0.size() != A.size())
    fail(ErrorCode::kLengthMismatch, "walk vector size does not match matrix");
  Eigen::VectorXd y(A.size());
  A.matvec(b_t, y);
  return alpha * y + (1.0 - alpha) * b0;
}

Eigen::VectorXd steady_state(const TransitionMatrix& A, const Eigen::VectorXd& b0, double alpha) {
  if (b0.size() != A.size())
    fail(ErrorCode::kLengthMismatch, "walk vector size does not match matrix");
  const int n = static_cast<int>(A.size());
  if (A.backend == MatrixBackend::kDense) {
    Eigen::MatrixXd system = -alpha * A.dense;
    system.diagonal().array() += 1.0;
    return system.partialPivLu().solve((1.0 - alpha) * b0);
  }
  // Sparse: fixed-point iteration, contraction factor alpha.
  Eigen::VectorXd b = b0;
  Eigen::VectorXd next(n);
  for (int it = 0; it < 10000; ++it) {
    A.matvec(b, next);
    next = alpha * next + (1.0 - alpha) * b0;
    const double diff = (next - b).lpNorm<Eigen::Infinity>();
    b.swap(next);
    if (diff < 1e-13) break;
  }
  return b;
}

void compete_softmax(Eigen::MatrixXd& scores) {
  const Eigen::Index n = scores.rows();
  const Eigen::Index k = scores.cols();
  if (k <= 0) fail(ErrorCode::kBadArgument, "softmax needs at least one graph");
  for (Eigen::Index i = 0; i < n; ++i) {
    const double top = scores.row(i).maxCoeff();
    double denom = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      const double e = std::exp(scores(i, j) - top);
      scores(i, j) = e;
      denom += e;
    }
    scores.row(i) /= denom;
  }
}

void update_seeds(const Eigen::MatrixXd& adjusted, double theta,
                  const std::vector<char>& eligible,
                  std::vector<std::vector<int>>& seed_sets, std::vector<int>& seed_of) {
  const int n = static_cast<int>(adjusted.rows());
  const int k = static_cast<int>(adjusted.cols());
  if (static_cast<int>(seed_sets.size()) != k)
    fail(ErrorCode::kLengthMismatch, "seed set count does not match graph count");
  if (static_cast<int>(eligible.size()) != n || static_cast<int>(seed_of.size()) != n)
    fail(ErrorCode::kLengthMismatch, "per-node arrays do not match score matrix");

  // Candidates per graph: eligible non-seeds whose best graph is that one.
  std::vector<std::vector<std::pair<double, int>>> candidates(k);
  for (int i = 0; i < n; ++i) {
    if (!eligible[i] || seed_of[i] >= 0) continue;
    int best = 0;
    for (int j = 1; j < k; ++j)
      if (adjusted(i, j) > adjusted(i, best)) best = j;
    candidates[best].push_back({adjusted(i, best), i});
  }
  for (int m = 0; m < k; ++m) {
    auto& cand = candidates[m];
    if (cand.empty()) continue;
    std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    const int cnt = static_cast<int>(cand.size());
    int take = static_cast<int>(std::ceil(theta * cnt - 1e-9));
    take = std::clamp(take, 1, cnt);
    for (int t = 0; t < take; ++t) {
      seed_sets[m].push_back(cand[t].second);
      seed_of[cand[t].second] = m;
    }
  }
}

namespace {

// Connected component sweep from the initial seeds over the positive entries
// of the transition matrix (structurally symmetric, so one direction is fine).
std::vector<char> reach_from_seeds(const TransitionMatrix& A,
                                   const std::vector<std::vector<int>>& seed_sets) {
  const int n = static_cast<int>(A.size());
  std::vector<char> seen(n, 0);
  std::queue<int> frontier;
  for (const auto& set : seed_sets)
    for (int s : set)
      if (!seen[s]) {
        seen[s] = 1;
        frontier.push(s);
      }
  while (!frontier.empty()) {
    const int i = frontier.front();
    frontier.pop();
    if (A.backend == MatrixBackend::kDense) {
      for (int j = 0; j < n; ++j)
        if (!seen[j] && A.dense(i, j) > 0.0) {
          seen[j] = 1;
          frontier.push(j);
        }
    } else {
      for (std::int64_t p = A.sparse.row_ptr[i]; p < A.sparse.row_ptr[i + 1]; ++p) {
        const int j = A.sparse.cols[p];
        if (!seen[j] && A.sparse.vals[p] > 0.0) {
          seen[j] = 1;
          frontier.push(j);
        }
      }
    }
  }
  return seen;
}

}  // namespace

GroupResult run_cgcrw(const GraphGroup& group, const CgcrwParams& params, int threads) {
  (void)threads;
  params.validate();
  const int n = group.node_count();
  const int k = group.graph_count();
  if (n <= 0) fail(ErrorCode::kBadArgument, "group has no nodes");
  if (k <= 0) fail(ErrorCode::kBadArgument, "group has no instances");
  if (group.transition.size() != n)
    fail(ErrorCode::kLengthMismatch, "transition matrix does not match node count");
  if (static_cast<int>(group.node_mask_ids.size()) != n ||
      static_cast<int>(group.shifted.size()) != n)
    fail(ErrorCode::kLengthMismatch, "per-node arrays do not match node count");

  std::unordered_map<int, int> graph_of;
  for (int m = 0; m < k; ++m) graph_of[group.instance_ids[m]] = m;

  // Initial seeds come straight from the spread weak masks.
  std::vector<std::vector<int>> seed_sets(k);
  std::vector<int> seed_of(n, -1);
  for (int i = 0; i < n; ++i) {
    const int id = group.node_mask_ids[i];
    if (id < 0) continue;
    auto it = graph_of.find(id);
    if (it == graph_of.end())
      fail(ErrorCode::kBadArgument, "mask instance id not in group instance list");
    seed_sets[it->second].push_back(i);
    seed_of[i] = it->second;
  }
  for (int m = 0; m < k; ++m)
    if (seed_sets[m].empty())
      fail(ErrorCode::kBadArgument,
           "instance " + std::to_string(group.instance_ids[m]) + " has no seed nodes");

  const std::vector<char> reachable = reach_from_seeds(group.transition, seed_sets);

  Eigen::MatrixXd b0(n, k);
  for (int m = 0; m < k; ++m) b0.col(m) = init_seed_vector(seed_sets[m], n);

  Eigen::MatrixXd B = b0;
  if (params.use_steady_state) {
    for (int m = 0; m < k; ++m)
      B.col(m) = steady_state(group.transition, b0.col(m), params.alpha);
  } else {
    for (int t = 0; t < params.t1_max; ++t)
      for (int m = 0; m < k; ++m)
        B.col(m) = propagate_step(group.transition, B.col(m), b0.col(m), params.alpha);
  }

  for (int iter = 0; iter < params.t2_max; ++iter) {
    Eigen::MatrixXd adjusted = B;
    compete_softmax(adjusted);
    // A node with no walk mass yet carries no evidence; keep it out of the
    // seed promotion even though its softmax row is uniform.
    std::vector<char> eligible(n, 0);
    for (int i = 0; i < n; ++i)
      eligible[i] = reachable[i] && B.row(i).maxCoeff() > 0.0;
    update_seeds(adjusted, params.theta, eligible, seed_sets, seed_of);
    for (int m = 0; m < k; ++m) b0.col(m) = init_seed_vector(seed_sets[m], n);
    B = adjusted;
    for (int m = 0; m < k; ++m)
      B.col(m) = propagate_step(group.transition, B.col(m), b0.col(m), params.alpha);
  }

  GroupResult out;
  out.assignment.assign(n, 0);
  out.score.assign(n, 0.0);
  out.reachable = reachable;
  std::vector<int> fallback;
  for (int i = 0; i < n; ++i) {
    int best = 0;
    for (int j = 1; j < k; ++j)
      if (B(i, j) > B(i, best)) best = j;
    out.assignment[i] = best;
    out.score[i] = B(i, best);
    if (!reachable[i] || out.score[i] <= 0.0) fallback.push_back(i);
  }

  // Weak masks are authoritative: pin those nodes to their annotated graph.
  for (int i = 0; i < n; ++i) {
    const int id = group.node_mask_ids[i];
    if (id < 0) continue;
    const int m = graph_of.at(id);
    out.assignment[i] = m;
    out.score[i] = B(i, m);
  }

  if (!fallback.empty()) {
    // Disconnected or untouched nodes take the nearest seed in shifted
    // coordinates; seed list ordered by graph so distance ties resolve to the
    // lowest instance id.
    std::vector<Vec3> seed_pos;
    std::vector<int> seed_graph;
    for (int m = 0; m < k; ++m)
      for (int s : seed_sets[m]) {
        seed_pos.push_back(group.shifted[s]);
        seed_graph.push_back(m);
      }
    SpatialGrid grid(seed_pos, std::max(params.sigma, 1e-6));
    for (int i : fallback) {
      if (group.node_mask_ids[i] >= 0) continue;
      const int nn = grid.nearest(group.shifted[i]);
      out.assignment[i] = seed_graph[nn];
      out.score[i] = B(i, seed_graph[nn]);
    }
  }

  out.seed_sets = std::move(seed_sets);
  return out;
}

std::vector<int> semantics_with_mask_override(const SceneBundle& scene,
                                              const SpreadLabels& spread) {
  std::vector<int> sem = scene.semantics.labels;
  for (std::size_t i = 0; i < sem.size(); ++i)
    if (spread.instance_ids[i] >= 0) sem[i] = spread.semantic_ids[i];
  return sem;
}

namespace {

// Uniform subsample without replacement that always keeps the mask points.
std::vector<int> subsample_members(const std::vector<int>& members,
                                   const std::vector<int>& spread_ids, int cap,
                                   std::uint64_t seed, std::vector<std::string>* warnings) {
  std::vector<int> forced;
  std::vector<int> pool;
  for (int i : members) {
    if (spread_ids[i] >= 0)
      forced.push_back(i);
    else
      pool.push_back(i);
  }
  if (static_cast<int>(forced.size()) >= cap) {
    if (warnings)
      warnings->push_back("weak-mask points alone exceed the subsample cap; keeping all " +
                          std::to_string(forced.size()) + " of them");
    return forced;
  }
  std::size_t need = static_cast<std::size_t>(cap) - forced.size();
  need = std::min(need, pool.size());
  std::mt19937_64 rng(seed);
  for (std::size_t j = 0; j < need; ++j) {
    std::uniform_int_distribution<std::size_t> pick(j, pool.size() - 1);
    std::swap(pool[j], pool[pick(rng)]);
  }
  pool.resize(need);
  std::vector<int> out = std::move(forced);
  out.insert(out.end(), pool.begin(), pool.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

InstanceLabeling segment_scene(const SceneBundle& scene, const CgcrwParams& params,
                               int threads, std::vector<std::string>* warnings) {
  params.validate();
  validate_scene(scene);
  const std::size_t n = scene.cloud.size();

  const SpreadLabels spread = spread_weak_labels(scene);
  const std::vector<int> wsem = semantics_with_mask_override(scene, spread);
  const auto by_class = scene.weak.instances_by_class();

  InstanceLabeling out;
  out.instance_ids.assign(n, -1);
  std::vector<double> node_score(n, 0.0);

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

    std::vector<int> sampled = members;
    const bool subsampled = static_cast<int>(members.size()) > params.subsample_cap;
    if (subsampled)
      sampled = subsample_members(members, spread.instance_ids, params.subsample_cap,
                                  hash_mix(params.rng_seed, static_cast<std::uint64_t>(cls)),
                                  warnings);

    GraphGroup group;
    group.semantic_id = cls;
    group.member_indices = sampled;
    group.instance_ids = ids;
    group.shifted.reserve(sampled.size());
    group.node_mask_ids.reserve(sampled.size());
    std::unordered_set<int> id_set(ids.begin(), ids.end());
    for (int g : sampled) {
      group.shifted.push_back(scene.cloud.points[g] + scene.offsets.offsets[g]);
      const int sid = spread.instance_ids[g];
      group.node_mask_ids.push_back(sid >= 0 && id_set.count(sid) ? sid : -1);
    }

    const MatrixBackend backend = choose_backend(static_cast<int>(sampled.size()), params);
    std::vector<Vec3> zero_offsets;  // shifted coords already folded in
    zero_offsets.assign(sampled.size(), Vec3::Zero());
    AffinityMatrix W = build_affinity(group.shifted, zero_offsets, params.sigma, backend,
                                      params.kernel_cutoff, threads);
    W = mask_cross_label_edges(std::move(W), group.node_mask_ids);
    group.transition = row_normalize(std::move(W));

    GroupResult res = run_cgcrw(group, params, threads);
    for (std::size_t loc = 0; loc < sampled.size(); ++loc) {
      out.instance_ids[sampled[loc]] = ids[res.assignment[loc]];
      node_score[sampled[loc]] = res.score[loc];
    }

    if (subsampled) {
      SpatialGrid grid(group.shifted, std::max(params.sigma, 1e-6));
      for (int g : members) {
        if (out.instance_ids[g] >= 0) continue;  // was sampled
        const Vec3 q = scene.cloud.points[g] + scene.offsets.offsets[g];
        const int donor = sampled[grid.nearest(q)];
        out.instance_ids[g] = out.instance_ids[donor];
        node_score[g] = node_score[donor];
      }
    }
  }

  // The initial annotations stay authoritative at the scene level too.
  for (std::size_t i = 0; i < n; ++i)
    if (spread.instance_ids[i] >= 0) out.instance_ids[i] = spread.instance_ids[i];

  std::unordered_map<int, std::pair<double, std::int64_t>> acc;
  for (std::size_t i = 0; i < n; ++i) {
    const int id = out.instance_ids[i];
    if (id < 0) continue;
    auto& slot = acc[id];
    slot.first += node_score[i];
    slot.second += 1;
  }
  for (const auto& [id, slot] : acc)
    out.confidences[id] = slot.first / static_cast<double>(slot.second);
  return out;
}

}  // namespace cgwalk
