#include <doctest.h>

#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "cgwalk/config.hpp"
#include "cgwalk/error.hpp"
#include "test_support.hpp"

using namespace cgwalk;

namespace {

ErrorCode code_of(const std::string& text) {
  try {
    RunConfig::from_json_text(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

std::string message_of(const std::string& text, const std::string& origin = "config") {
  try {
    RunConfig::from_json_text(text, origin);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("an empty object yields the documented defaults") {
  const auto cfg = RunConfig::from_json_text("{}");
  CHECK(cfg.seed == 0);
  CHECK(cfg.threads == 1);
  CHECK(cfg.cgcrw.alpha == 0.2);
  CHECK(cfg.cgcrw.theta == 0.5);
  CHECK(cfg.cgcrw.sigma == 0.3);
  CHECK(cfg.cgcrw.t1_max == 1);
  CHECK(cfg.cgcrw.t2_max == 5);
  CHECK(cfg.cgcrw.subsample_cap == 25000);
  CHECK(cfg.cgcrw.dense_limit == 8192);
  CHECK(cfg.cgcrw.kernel_cutoff == std::exp(-4.5));
  CHECK(cfg.cgcrw.use_steady_state == false);
  CHECK(cfg.baseline.algorithm == BaselineAlgorithm::kKmeans);
  CHECK(cfg.baseline.coordinates == CoordinateMode::kShifted);
  CHECK(cfg.baseline.bfs_radius == 0.03);
  CHECK(cfg.baseline.bfs_min_points == 50);
  CHECK(cfg.baseline.kmeans_max_iters == 100);
  CHECK(cfg.scene.classes == 2);
  CHECK(cfg.scene.instances_per_class.lo == 2);
  CHECK(cfg.scene.points_per_instance.hi == 200);
  CHECK(cfg.scene.packing == PackingMode::kSeparable);
}

TEST_CASE("unknown keys are rejected with their dotted path") {
  CHECK(code_of(R"({"sneed": 1})") == ErrorCode::kConfig);
  CHECK(message_of(R"({"sneed": 1})").find("\"sneed\"") != std::string::npos);

  const std::string nested = R"({"cgcrw": {"sigmma": 0.3}})";
  CHECK(code_of(nested) == ErrorCode::kConfig);
  CHECK(message_of(nested).find("cgcrw.sigmma") != std::string::npos);

  const std::string scene = R"({"scene": {"gaps": 0.1}})";
  CHECK(message_of(scene).find("scene.gaps") != std::string::npos);
}

TEST_CASE("wrong value types are rejected") {
  CHECK(code_of(R"({"cgcrw": {"sigma": "wide"}})") == ErrorCode::kConfig);
  CHECK(code_of(R"({"cgcrw": {"use_steady_state": 3}})") == ErrorCode::kConfig);
  CHECK(code_of(R"({"scene": {"instances_per_class": [1]}})") == ErrorCode::kConfig);
  CHECK(code_of(R"({"scene": {"radius_range": "wide"}})") == ErrorCode::kConfig);
  CHECK(code_of(R"({"cgcrw": 7})") == ErrorCode::kConfig);
}

TEST_CASE("malformed json reports a parse error naming the origin") {
  try {
    RunConfig::from_json_text("{nope", "runs/exp1.json");
    FAIL("expected an Error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
    CHECK(std::string(e.what()).find("runs/exp1.json") != std::string::npos);
  }
}

TEST_CASE("invalid parameter values fail validation on load") {
  CHECK(code_of(R"({"cgcrw": {"alpha": 1.5}})") == ErrorCode::kConfig);
  CHECK(code_of(R"({"threads": 0})") == ErrorCode::kConfig);
  CHECK(code_of(R"({"scene": {"offset_quality": -0.5}})") == ErrorCode::kConfig);
}

TEST_CASE("bad enum choices list the valid names") {
  const std::string algo = R"({"baseline": {"algorithm": "dbscan"}})";
  CHECK(code_of(algo) == ErrorCode::kConfig);
  const std::string msg = message_of(algo);
  CHECK(msg.find("kmeans") != std::string::npos);
  CHECK(msg.find("bfs") != std::string::npos);

  CHECK(message_of(R"({"scene": {"shape": "torus"}})").find("ellipsoid") != std::string::npos);
  CHECK(message_of(R"({"scene": {"packing": "dense"}})").find("separable") != std::string::npos);
}

TEST_CASE("the echoed config round-trips to an identical echo") {
  const std::string text = R"({
    "seed": 42,
    "threads": 4,
    "cgcrw": {"sigma": 0.35, "theta": 0.25, "t2_max": 10, "use_steady_state": true},
    "baseline": {"algorithm": "bfs", "coordinates": "original", "bfs_radius": 0.1},
    "scene": {"classes": 3, "packing": "packed", "gap": 0.05,
              "instances_per_class": [4, 6], "aspect_range": [0.3, 2.4],
              "shape": "box_shell", "semantic_flip_rate": 0.02}
  })";
  const auto cfg = RunConfig::from_json_text(text);
  const std::string echo = cfg.to_json_text();
  const auto reparsed = RunConfig::from_json_text(echo, "echo");
  CHECK(reparsed.to_json_text() == echo);

  const nlohmann::json j = nlohmann::json::parse(echo);
  CHECK(j["seed"].get<int>() == 42);
  CHECK(j["cgcrw"]["sigma"].get<double>() == 0.35);
  CHECK(j["cgcrw"]["use_steady_state"].get<bool>() == true);
  CHECK(j["baseline"]["algorithm"].get<std::string>() == "bfs");
  CHECK(j["scene"]["shape"].get<std::string>() == "box_shell");
  CHECK(j["scene"]["instances_per_class"][1].get<int>() == 6);
}

TEST_CASE("the top-level seed feeds every component seed") {
  const auto cfg = RunConfig::from_json_text(R"({"seed": 1234})");
  CHECK(cfg.cgcrw.rng_seed == 1234);
  CHECK(cfg.baseline.rng_seed == 1234);
  CHECK(cfg.scene.rng_seed == 1234);

  RunConfig manual;
  manual.seed = 9;
  manual.propagate_seed();
  CHECK(manual.scene.rng_seed == 9);
}

TEST_CASE("load_file reads configs and reports missing files") {
  TempDir dir;
  const auto path = (dir.path() / "cfg.json").string();
  {
    std::ofstream out(path);
    out << R"({"seed": 7, "cgcrw": {"sigma": 0.4}})";
  }
  const auto cfg = RunConfig::load_file(path);
  CHECK(cfg.seed == 7);
  CHECK(cfg.cgcrw.sigma == 0.4);

  try {
    RunConfig::load_file((dir.path() / "absent.json").string());
    FAIL("expected an Error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
    CHECK(std::string(e.what()).find("absent.json") != std::string::npos);
  }
}
