#include <doctest.h>

#include <fstream>
#include <random>
#include <string>

#include "cgwalk/bundle_io.hpp"
#include "cgwalk/error.hpp"
#include "cgwalk/util.hpp"
#include "test_support.hpp"

using namespace cgwalk;

namespace {

SceneBundle sample_scene(unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-3.0, 3.0);
  SceneBundle scene;
  scene.name = "sample";
  const int n = 40;
  for (int i = 0; i < n; ++i) {
    scene.cloud.points.push_back(Vec3(uni(rng), uni(rng), uni(rng)));
    scene.offsets.offsets.push_back(Vec3(uni(rng), uni(rng), uni(rng)) * 0.01);
    scene.semantics.labels.push_back(i % 3);
  }
  scene.semantics.foreground_classes = {0, 1, 2};
  scene.weak.entries = {{0, 0, 0}, {1, 1, 1}, {2, 2, 2}};
  scene.supervoxels = SupervoxelSegmentation{};
  scene.gt_instances = std::vector<int>();
  scene.gt_semantics = std::vector<int>();
  for (int i = 0; i < n; ++i) {
    scene.supervoxels->segment_ids.push_back(i / 4);
    scene.gt_instances->push_back(i % 4);
    scene.gt_semantics->push_back(i % 3);
  }
  return scene;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace

TEST_CASE("bundle save/load round-trips every field exactly") {
  TempDir dir;
  const auto scene = sample_scene(3);
  save_bundle(scene, dir.path());
  const auto loaded = load_bundle(dir.path());

  CHECK(loaded.name == scene.name);
  REQUIRE(loaded.size() == scene.size());
  for (int i = 0; i < scene.size(); ++i) {
    CHECK(loaded.cloud.points[i] == scene.cloud.points[i]);
    CHECK(loaded.offsets.offsets[i] == scene.offsets.offsets[i]);
    CHECK(loaded.semantics.labels[i] == scene.semantics.labels[i]);
  }
  CHECK(loaded.semantics.foreground_classes == scene.semantics.foreground_classes);
  REQUIRE(loaded.weak.entries.size() == scene.weak.entries.size());
  for (std::size_t e = 0; e < scene.weak.entries.size(); ++e) {
    CHECK(loaded.weak.entries[e].point_index == scene.weak.entries[e].point_index);
    CHECK(loaded.weak.entries[e].semantic_id == scene.weak.entries[e].semantic_id);
    CHECK(loaded.weak.entries[e].instance_id == scene.weak.entries[e].instance_id);
  }
  REQUIRE(loaded.supervoxels.has_value());
  CHECK(loaded.supervoxels->segment_ids == scene.supervoxels->segment_ids);
  REQUIRE(loaded.gt_instances.has_value());
  CHECK(*loaded.gt_instances == *scene.gt_instances);
  REQUIRE(loaded.gt_semantics.has_value());
  CHECK(*loaded.gt_semantics == *scene.gt_semantics);

  // A second save produces byte-identical files.
  TempDir dir2;
  save_bundle(loaded, dir2.path());
  for (const char* f : {"points.txt", "semantic.txt", "offsets.txt", "weak.txt",
                        "supervoxels.txt", "gt_instance.txt", "gt_semantic.txt", "meta.json"}) {
    CHECK(read_text_file(dir.path() / f) == read_text_file(dir2.path() / f));
  }
}

TEST_CASE("optional files may be absent") {
  TempDir dir;
  auto scene = sample_scene(4);
  scene.supervoxels.reset();
  scene.gt_instances.reset();
  scene.gt_semantics.reset();
  save_bundle(scene, dir.path());
  CHECK_FALSE(std::filesystem::exists(dir.path() / "supervoxels.txt"));
  const auto loaded = load_bundle(dir.path());
  CHECK_FALSE(loaded.supervoxels.has_value());
  CHECK_FALSE(loaded.gt_instances.has_value());
}

TEST_CASE("comments and blank lines are accepted in data files") {
  TempDir dir;
  save_bundle(sample_scene(5), dir.path());
  auto text = read_text_file(dir.path() / "semantic.txt");
  write_file(dir.path() / "semantic.txt", "# header\n\n" + text + "\n# trailer\n");
  CHECK_NOTHROW(load_bundle(dir.path()));
}

TEST_CASE("a missing required file is reported by name") {
  TempDir dir;
  save_bundle(sample_scene(6), dir.path());
  std::filesystem::remove(dir.path() / "offsets.txt");
  try {
    load_bundle(dir.path());
    FAIL("expected an Error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
    CHECK(std::string(e.what()).find("offsets.txt") != std::string::npos);
  }
}

TEST_CASE("a malformed token is reported with file and line") {
  TempDir dir;
  save_bundle(sample_scene(7), dir.path());
  write_file(dir.path() / "points.txt", "0 0 0\n1 1 1\n2 nope 2\n");
  try {
    load_bundle(dir.path());
    FAIL("expected an Error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
    const std::string what = e.what();
    CHECK(what.find("points.txt") != std::string::npos);
    CHECK(what.find("3") != std::string::npos);
  }
}

TEST_CASE("row-count mismatches between files are rejected") {
  TempDir dir;
  save_bundle(sample_scene(8), dir.path());
  write_file(dir.path() / "semantic.txt", "0\n1\n");
  CHECK_THROWS_AS(load_bundle(dir.path()), Error);
}

TEST_CASE("labeling save/load round-trips ids and confidences") {
  TempDir dir;
  InstanceLabeling labeling;
  labeling.instance_ids = {0, 0, 1, -1, 2, 2, 2};
  labeling.confidences = {{0, 0.75}, {1, 1.0}, {2, 0.321}};
  save_labeling(labeling, dir.path());
  const auto loaded = load_labeling(dir.path(), 7);
  CHECK(loaded.instance_ids == labeling.instance_ids);
  CHECK(loaded.confidences == labeling.confidences);

  // The declared point count is enforced.
  CHECK_THROWS_AS(load_labeling(dir.path(), 8), Error);
}
