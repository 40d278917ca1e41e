#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "cgwalk/graph.hpp"
#include "cgwalk/scene.hpp"

namespace cgwalk {

// One semantic class's points with the k per-instance graphs that share a
// single transition matrix.
struct GraphGroup {
  int semantic_id = -1;
  std::vector<int> member_indices;  // global point indices, ascending
  std::vector<Vec3> shifted;        // x_i + d_i per member
  std::vector<int> node_mask_ids;   // spread weak instance id or -1, per member
  std::vector<int> instance_ids;    // the k instance ids, ascending
  TransitionMatrix transition;

  int node_count() const { return static_cast<int>(member_indices.size()); }
  int graph_count() const { return static_cast<int>(instance_ids.size()); }
};

// Uniform mass 1/|seeds| on each seed, 0 elsewhere.
Eigen::VectorXd init_seed_vector(const std::vector<int>& seed_set, int n);

// One blended walk step: alpha * A * b_t + (1 - alpha) * b0.
Eigen::VectorXd propagate_step(const TransitionMatrix& A, const Eigen::VectorXd& b_t,
                               const Eigen::VectorXd& b0, double alpha);

// Limit of the blended walk: (1 - alpha) * (I - alpha A)^{-1} * b0, computed
// by a linear solve on the dense backend and by iteration on the sparse one.
Eigen::VectorXd steady_state(const TransitionMatrix& A, const Eigen::VectorXd& b0, double alpha);

// Per-node softmax across the k graphs (scores is n x k); afterwards every
// node's scores sum to 1.
void compete_softmax(Eigen::MatrixXd& scores);

// Promotes, for each graph m, the ceil(theta * |candidates|) highest-scoring
// candidates into seed set m. Candidates are eligible non-seed nodes whose
// argmax over graphs is m (ties to the lowest graph). Seed sets only grow and
// stay disjoint.
void update_seeds(const Eigen::MatrixXd& adjusted, double theta,
                  const std::vector<char>& eligible,
                  std::vector<std::vector<int>>& seed_sets, std::vector<int>& seed_of);

struct GroupResult {
  std::vector<int> assignment;            // per node: graph index 0..k-1
  std::vector<double> score;              // final score in the assigned graph
  std::vector<std::vector<int>> seed_sets;  // final seed sets per graph
  std::vector<char> reachable;            // connected to some initial seed
};

// Runs the full competing random walk on one group: t1_max plain propagation
// steps, then t2_max competition iterations (softmax, seed promotion, seed
// vector reinitialization, one step). Final label is the argmax graph; nodes
// under an initial weak mask are overridden to that mask; nodes with no score
// fall back to the nearest seed in shifted coordinates.
GroupResult run_cgcrw(const GraphGroup& group, const CgcrwParams& params, int threads = 1);

// Predicted semantics with every initial-mask point forced to its annotated
// class, so each instance's seeds always land in their own group.
std::vector<int> semantics_with_mask_override(const SceneBundle& scene,
                                              const SpreadLabels& spread);

// Whole-scene segmentation: groups foreground points by semantic id, walks
// each group (subsampling above subsample_cap and extending labels back by
// 1-NN in shifted coordinates), and fills per-instance confidences with the
// mean final score of each instance's points.
InstanceLabeling segment_scene(const SceneBundle& scene, const CgcrwParams& params,
                               int threads = 1, std::vector<std::string>* warnings = nullptr);

}  // namespace cgwalk
