#include "cgwalk/config.hpp"

#include <set>
#include <vector>

#include <json.hpp>

#include "cgwalk/error.hpp"
#include "cgwalk/util.hpp"

namespace cgwalk {

namespace {

using nlohmann::json;

[[noreturn]] void config_fail(const std::string& origin, const std::string& msg) {
  fail(ErrorCode::kConfig, origin + ": " + msg);
}

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& origin, const std::string& scope) {
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key))
      config_fail(origin, "unknown key \"" + (scope.empty() ? key : scope + "." + key) + "\"");
}

template <typename T>
void read_number(const json& obj, const char* key, T& slot, const std::string& origin,
                 const std::string& scope) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  if (!it->is_number())
    config_fail(origin, scope + "." + key + " must be a number");
  slot = it->get<T>();
}

void read_bool(const json& obj, const char* key, bool& slot, const std::string& origin,
               const std::string& scope) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  if (!it->is_boolean()) config_fail(origin, scope + "." + key + " must be a boolean");
  slot = it->get<bool>();
}

void read_int_range(const json& obj, const char* key, IntRange& slot, const std::string& origin,
                    const std::string& scope) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number_integer() ||
      !(*it)[1].is_number_integer())
    config_fail(origin, scope + "." + key + " must be a two-element integer array");
  slot.lo = (*it)[0].get<int>();
  slot.hi = (*it)[1].get<int>();
}

void read_double_range(const json& obj, const char* key, DoubleRange& slot,
                       const std::string& origin, const std::string& scope) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number())
    config_fail(origin, scope + "." + key + " must be a two-element number array");
  slot.lo = (*it)[0].get<double>();
  slot.hi = (*it)[1].get<double>();
}

std::string read_choice(const json& obj, const char* key, const std::string& current,
                        const std::vector<std::string>& choices, const std::string& origin,
                        const std::string& scope) {
  auto it = obj.find(key);
  if (it == obj.end()) return current;
  if (!it->is_string()) config_fail(origin, scope + "." + key + " must be a string");
  const std::string v = it->get<std::string>();
  for (const auto& c : choices)
    if (v == c) return v;
  std::string opts;
  for (const auto& c : choices) opts += (opts.empty() ? "" : ", ") + c;
  config_fail(origin, scope + "." + key + " must be one of: " + opts);
}

}  // namespace

void RunConfig::propagate_seed() {
  cgcrw.rng_seed = seed;
  baseline.rng_seed = seed;
  scene.rng_seed = seed;
}

void RunConfig::validate() const {
  if (threads < 1) fail(ErrorCode::kConfig, "threads must be at least 1");
  cgcrw.validate();
  baseline.validate();
  scene.validate();
}

RunConfig RunConfig::from_json_text(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kParse, origin + ": " + e.what());
  }
  if (!root.is_object()) config_fail(origin, "top level must be a JSON object");
  check_keys(root, {"seed", "threads", "cgcrw", "baseline", "scene"}, origin, "");

  RunConfig cfg;
  read_number(root, "seed", cfg.seed, origin, "");
  read_number(root, "threads", cfg.threads, origin, "");

  if (auto it = root.find("cgcrw"); it != root.end()) {
    if (!it->is_object()) config_fail(origin, "cgcrw must be an object");
    const json& c = *it;
    check_keys(c,
               {"alpha", "theta", "sigma", "t1_max", "t2_max", "subsample_cap", "dense_limit",
                "kernel_cutoff", "use_steady_state"},
               origin, "cgcrw");
    read_number(c, "alpha", cfg.cgcrw.alpha, origin, "cgcrw");
    read_number(c, "theta", cfg.cgcrw.theta, origin, "cgcrw");
    read_number(c, "sigma", cfg.cgcrw.sigma, origin, "cgcrw");
    read_number(c, "t1_max", cfg.cgcrw.t1_max, origin, "cgcrw");
    read_number(c, "t2_max", cfg.cgcrw.t2_max, origin, "cgcrw");
    read_number(c, "subsample_cap", cfg.cgcrw.subsample_cap, origin, "cgcrw");
    read_number(c, "dense_limit", cfg.cgcrw.dense_limit, origin, "cgcrw");
    read_number(c, "kernel_cutoff", cfg.cgcrw.kernel_cutoff, origin, "cgcrw");
    read_bool(c, "use_steady_state", cfg.cgcrw.use_steady_state, origin, "cgcrw");
  }

  if (auto it = root.find("baseline"); it != root.end()) {
    if (!it->is_object()) config_fail(origin, "baseline must be an object");
    const json& b = *it;
    check_keys(b, {"algorithm", "coordinates", "bfs_radius", "bfs_min_points", "kmeans_max_iters"},
               origin, "baseline");
    const std::string algo =
        read_choice(b, "algorithm",
                    cfg.baseline.algorithm == BaselineAlgorithm::kKmeans ? "kmeans" : "bfs",
                    {"kmeans", "bfs"}, origin, "baseline");
    cfg.baseline.algorithm = algo == "kmeans" ? BaselineAlgorithm::kKmeans : BaselineAlgorithm::kBfs;
    const std::string coords =
        read_choice(b, "coordinates",
                    cfg.baseline.coordinates == CoordinateMode::kShifted ? "shifted" : "original",
                    {"original", "shifted"}, origin, "baseline");
    cfg.baseline.coordinates =
        coords == "shifted" ? CoordinateMode::kShifted : CoordinateMode::kOriginal;
    read_number(b, "bfs_radius", cfg.baseline.bfs_radius, origin, "baseline");
    read_number(b, "bfs_min_points", cfg.baseline.bfs_min_points, origin, "baseline");
    read_number(b, "kmeans_max_iters", cfg.baseline.kmeans_max_iters, origin, "baseline");
  }

  if (auto it = root.find("scene"); it != root.end()) {
    if (!it->is_object()) config_fail(origin, "scene must be an object");
    const json& s = *it;
    check_keys(s,
               {"classes", "instances_per_class", "points_per_instance", "shape", "packing",
                "gap", "radius_range", "aspect_range", "offset_quality", "offset_noise",
                "semantic_flip_rate", "supervoxel_cell", "arena_edge"},
               origin, "scene");
    read_number(s, "classes", cfg.scene.classes, origin, "scene");
    read_int_range(s, "instances_per_class", cfg.scene.instances_per_class, origin, "scene");
    read_int_range(s, "points_per_instance", cfg.scene.points_per_instance, origin, "scene");
    const std::string shape =
        read_choice(s, "shape",
                    cfg.scene.shape == InstanceShape::kEllipsoid ? "ellipsoid" : "box_shell",
                    {"ellipsoid", "box_shell"}, origin, "scene");
    cfg.scene.shape = shape == "ellipsoid" ? InstanceShape::kEllipsoid : InstanceShape::kBoxShell;
    const std::string packing =
        read_choice(s, "packing",
                    cfg.scene.packing == PackingMode::kSeparable ? "separable" : "packed",
                    {"separable", "packed"}, origin, "scene");
    cfg.scene.packing = packing == "separable" ? PackingMode::kSeparable : PackingMode::kPacked;
    read_number(s, "gap", cfg.scene.gap, origin, "scene");
    read_double_range(s, "radius_range", cfg.scene.radius_range, origin, "scene");
    read_double_range(s, "aspect_range", cfg.scene.aspect_range, origin, "scene");
    read_number(s, "offset_quality", cfg.scene.offset_quality, origin, "scene");
    read_number(s, "offset_noise", cfg.scene.offset_noise, origin, "scene");
    read_number(s, "semantic_flip_rate", cfg.scene.semantic_flip_rate, origin, "scene");
    read_number(s, "supervoxel_cell", cfg.scene.supervoxel_cell, origin, "scene");
    read_number(s, "arena_edge", cfg.scene.arena_edge, origin, "scene");
  }

  cfg.propagate_seed();
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::load_file(const std::string& path) {
  return from_json_text(read_text_file(path), path);
}

std::string RunConfig::to_json_text() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["threads"] = threads;
  j["cgcrw"] = {{"alpha", cgcrw.alpha},
                {"theta", cgcrw.theta},
                {"sigma", cgcrw.sigma},
                {"t1_max", cgcrw.t1_max},
                {"t2_max", cgcrw.t2_max},
                {"subsample_cap", cgcrw.subsample_cap},
                {"dense_limit", cgcrw.dense_limit},
                {"kernel_cutoff", cgcrw.kernel_cutoff},
                {"use_steady_state", cgcrw.use_steady_state}};
  j["baseline"] = {
      {"algorithm", baseline.algorithm == BaselineAlgorithm::kKmeans ? "kmeans" : "bfs"},
      {"coordinates", baseline.coordinates == CoordinateMode::kShifted ? "shifted" : "original"},
      {"bfs_radius", baseline.bfs_radius},
      {"bfs_min_points", baseline.bfs_min_points},
      {"kmeans_max_iters", baseline.kmeans_max_iters}};
  j["scene"] = {
      {"classes", scene.classes},
      {"instances_per_class", {scene.instances_per_class.lo, scene.instances_per_class.hi}},
      {"points_per_instance", {scene.points_per_instance.lo, scene.points_per_instance.hi}},
      {"shape", scene.shape == InstanceShape::kEllipsoid ? "ellipsoid" : "box_shell"},
      {"packing", scene.packing == PackingMode::kSeparable ? "separable" : "packed"},
      {"gap", scene.gap},
      {"radius_range", {scene.radius_range.lo, scene.radius_range.hi}},
      {"aspect_range", {scene.aspect_range.lo, scene.aspect_range.hi}},
      {"offset_quality", scene.offset_quality},
      {"offset_noise", scene.offset_noise},
      {"semantic_flip_rate", scene.semantic_flip_rate},
      {"supervoxel_cell", scene.supervoxel_cell},
      {"arena_edge", scene.arena_edge}};
  return j.dump(2) + "\n";
}

}  // namespace cgwalk
