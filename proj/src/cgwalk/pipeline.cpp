#include "cgwalk/pipeline.hpp"

#include "cgwalk/baselines.hpp"
#include "cgwalk/error.hpp"
#include "cgwalk/walk.hpp"

namespace cgwalk {

Algo parse_algo(const std::string& name) {
  if (name == "cgcrw") return Algo::kCgcrw;
  if (name == "rw") return Algo::kRw;
  if (name == "kmeans") return Algo::kKmeans;
  if (name == "bfs") return Algo::kBfs;
  fail(ErrorCode::kBadArgument,
       "unknown algorithm \"" + name + "\" (expected cgcrw, rw, kmeans, or bfs)");
}

const char* algo_name(Algo algo) {
  switch (algo) {
    case Algo::kCgcrw: return "cgcrw";
    case Algo::kRw: return "rw";
    case Algo::kKmeans: return "kmeans";
    case Algo::kBfs: return "bfs";
  }
  return "?";
}

InstanceLabeling run_segmentation(const SceneBundle& scene, Algo algo, const RunConfig& config,
                                  int threads, std::vector<std::string>* warnings) {
  switch (algo) {
    case Algo::kCgcrw:
      return segment_scene(scene, config.cgcrw, threads, warnings);
    case Algo::kRw: {
      CgcrwParams params = config.cgcrw;
      params.t2_max = 0;
      return segment_scene(scene, params, threads, warnings);
    }
    case Algo::kKmeans: {
      BaselineParams params = config.baseline;
      params.algorithm = BaselineAlgorithm::kKmeans;
      return segment_scene_baseline(scene, params, warnings);
    }
    case Algo::kBfs: {
      BaselineParams params = config.baseline;
      params.algorithm = BaselineAlgorithm::kBfs;
      return segment_scene_baseline(scene, params, warnings);
    }
  }
  fail(ErrorCode::kInternal, "unhandled algorithm tag");
}

}  // namespace cgwalk
