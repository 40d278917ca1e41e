#pragma once

#include <string>
#include <vector>

#include "cgwalk/config.hpp"
#include "cgwalk/metrics.hpp"
#include "cgwalk/scene.hpp"

namespace cgwalk {

// `rw` is the plain seeded walk: the competing walk with zero competition
// rounds.
enum class Algo { kCgcrw, kRw, kKmeans, kBfs };

Algo parse_algo(const std::string& name);
const char* algo_name(Algo algo);

// Dispatches one scene to the chosen algorithm under the run configuration.
InstanceLabeling run_segmentation(const SceneBundle& scene, Algo algo, const RunConfig& config,
                                  int threads, std::vector<std::string>* warnings = nullptr);

}  // namespace cgwalk
