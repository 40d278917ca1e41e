#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <random>
#include <vector>

#include <json.hpp>

#include "cgwalk/error.hpp"
#include "cgwalk/metrics.hpp"
#include "cgwalk/synth.hpp"
#include "test_support.hpp"

using namespace cgwalk;

namespace {

InstanceLabeling make_label(std::vector<int> ids, std::map<int, double> conf) {
  InstanceLabeling out;
  out.instance_ids = std::move(ids);
  out.confidences = std::move(conf);
  return out;
}

}  // namespace

TEST_CASE("miou is 1 for a perfect prediction and 0 for a disjoint one") {
  const std::vector<int> gt = {0, 0, 1, 1};
  CHECK(semantic_miou(gt, gt, {0, 1}).mean == 1.0);
  const std::vector<int> swapped = {1, 1, 0, 0};
  CHECK(semantic_miou(swapped, gt, {0, 1}).mean == 0.0);
}

TEST_CASE("miou hand count: five of ten class points recovered gives 0.5") {
  // gt has ten points of class 2; pred marks five of them and nothing else.
  std::vector<int> gt(12, 2), pred(12, 0);
  gt[10] = gt[11] = 0;
  for (int i = 0; i < 5; ++i) pred[i] = 2;
  const auto result = semantic_miou(pred, gt, {2});
  REQUIRE(result.per_class.size() == 1);
  CHECK(result.per_class[0].class_id == 2);
  CHECK(result.per_class[0].value == 0.5);
  CHECK(result.mean == 0.5);
}

TEST_CASE("miou skips classes absent from both sides") {
  const std::vector<int> gt = {0, 0, 1, 1};
  const auto result = semantic_miou(gt, gt, {0, 1, 5});
  CHECK(result.per_class.size() == 2);
  CHECK(result.mean == 1.0);
}

TEST_CASE("miou rejects mismatched lengths") {
  CHECK_THROWS_AS(semantic_miou({0, 1}, {0}, {0, 1}), Error);
}

TEST_CASE("ap is 1 when the single prediction equals the single gt mask") {
  const std::vector<int> gt_inst = {7, 7, 7, -1};
  const std::vector<int> sem = {1, 1, 1, -1};
  const auto pred = make_label({3, 3, 3, -1}, {{3, 0.9}});
  const auto result = instance_ap(pred, sem, gt_inst, sem, {1});
  CHECK(result.map == 1.0);
  CHECK(result.map50 == 1.0);
  CHECK(result.map25 == 1.0);
}

TEST_CASE("ap at iou 0.4: counted at the 0.25 threshold, rejected at 0.5") {
  // gt mask {0,1,2,3}, prediction {2,3,4}: intersection 2, union 5.
  const std::vector<int> gt_inst = {9, 9, 9, 9, -1};
  const std::vector<int> sem = {0, 0, 0, 0, 0};
  const auto pred = make_label({-1, -1, 4, 4, 4}, {{4, 0.8}});
  const auto result = instance_ap(pred, sem, gt_inst, sem, {0});
  CHECK(result.map25 == 1.0);
  CHECK(result.map50 == 0.0);
  CHECK(result.map == 0.0);
}

TEST_CASE("ap50 is 0.5 when one of two gt instances is matched at iou 0.6") {
  // gt A = {0..4}, gt B = {5..7}; the only prediction covers three points of
  // A: intersection 3, union 5.
  const std::vector<int> gt_inst = {1, 1, 1, 1, 1, 2, 2, 2};
  const std::vector<int> sem = {0, 0, 0, 0, 0, 0, 0, 0};
  const auto pred = make_label({6, 6, 6, -1, -1, -1, -1, -1}, {{6, 0.8}});
  const auto result = instance_ap(pred, sem, gt_inst, sem, {0});
  CHECK(result.map50 == 0.5);
  CHECK(result.map25 == 0.5);
}

TEST_CASE("matching claims the highest-iou gt, not the first one") {
  // G1 = {0..9}, G2 = {10..19}. Pred A overlaps both above 0.25 but G1 more;
  // pred B sits inside G1 only. If A grabbed G2 instead, B would match G1 and
  // AP25 would be 1 rather than 0.5.
  std::vector<int> gt_inst(20), sem(20, 0);
  for (int i = 0; i < 20; ++i) gt_inst[i] = i < 10 ? 1 : 2;
  std::vector<int> ids(20, -1);
  for (int i = 5; i <= 13; ++i) ids[i] = 50;  // A: IoU(G1) = 5/14, IoU(G2) = 4/15
  for (int i = 0; i <= 4; ++i) ids[i] = 60;   // B: IoU(G1) = 5/10, IoU(G2) = 0
  const auto pred = make_label(ids, {{50, 0.9}, {60, 0.5}});
  const auto result = instance_ap(pred, sem, gt_inst, sem, {0});
  CHECK(result.map25 == 0.5);
}

TEST_CASE("all-point interpolation integrates an interleaved hit sequence") {
  // Hits in confidence order: hit, miss, hit with two gt instances. The
  // envelope gives AP50 = 0.5 * 1 + 0.5 * 2/3 = 5/6.
  std::vector<int> gt_inst(15, -1), sem(15, 0);
  for (int i = 0; i < 5; ++i) gt_inst[i] = 1;
  for (int i = 5; i < 10; ++i) gt_inst[i] = 2;
  std::vector<int> ids(15, -1);
  for (int i = 0; i < 5; ++i) ids[i] = 10;    // exact match of G1, conf 0.9
  for (int i = 10; i < 15; ++i) ids[i] = 20;  // background-only, conf 0.5
  for (int i = 5; i < 10; ++i) ids[i] = 30;   // exact match of G2, conf 0.1
  const auto pred = make_label(ids, {{10, 0.9}, {20, 0.5}, {30, 0.1}});
  const auto result = instance_ap(pred, sem, gt_inst, sem, {0});
  CHECK(result.map50 == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("missing confidence for a predicted instance is an error") {
  const std::vector<int> gt_inst = {1, 1};
  const std::vector<int> sem = {0, 0};
  const auto pred = make_label({4, 4}, {});
  CHECK_THROWS_AS(instance_ap(pred, sem, gt_inst, sem, {0}), Error);
}

TEST_CASE("precision and recall hand cases") {
  const std::vector<int> sem = {0, 0, 0, 0, 0, 0};
  const std::vector<int> gt_inst = {1, 1, 1, 2, 2, 2};

  SUBCASE("perfect prediction") {
    const auto pred = make_label({1, 1, 1, 2, 2, 2}, {{1, 1.0}, {2, 1.0}});
    const auto pr = precision_recall_at_iou(pred, sem, gt_inst, sem, {0});
    CHECK(pr.precision == 1.0);
    CHECK(pr.recall == 1.0);
  }
  SUBCASE("one of two gt instances covered") {
    const auto pred = make_label({1, 1, 1, -1, -1, -1}, {{1, 1.0}});
    const auto pr = precision_recall_at_iou(pred, sem, gt_inst, sem, {0});
    CHECK(pr.precision == 1.0);
    CHECK(pr.recall == 0.5);
  }
  SUBCASE("zero predictions against existing gt") {
    const auto pred = make_label({-1, -1, -1, -1, -1, -1}, {});
    const auto pr = precision_recall_at_iou(pred, sem, gt_inst, sem, {0});
    CHECK(pr.precision == 0.0);
    CHECK(pr.recall == 0.0);
  }
}

TEST_CASE("ap is monotone in the iou threshold on random labelings") {
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 200;
    std::uniform_int_distribution<int> gt_id(0, 3), pred_id(-1, 4), cls(0, 1);
    std::vector<int> gt_inst(n), gt_sem(n), pred_ids(n), pred_sem(n);
    for (int i = 0; i < n; ++i) {
      gt_inst[i] = gt_id(rng);
      gt_sem[i] = gt_inst[i] % 2;
      pred_ids[i] = pred_id(rng);
      pred_sem[i] = cls(rng);
    }
    std::map<int, double> conf;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int id = 0; id <= 4; ++id) conf[id] = unit(rng);
    const auto result = instance_ap(make_label(pred_ids, conf), pred_sem, gt_inst, gt_sem, {0, 1});
    CHECK(result.map25 >= result.map50);
    CHECK(result.map50 >= result.map);
    for (const auto& cv : result.ap) {
      CHECK(cv.value >= 0.0);
      CHECK(cv.value <= 1.0);
    }
    CHECK(result.map25 <= 1.0);
    CHECK(result.map >= 0.0);
  }
}

TEST_CASE("metrics ignore the numeric values of instance ids") {
  std::mt19937_64 rng(405);
  const int n = 150;
  std::uniform_int_distribution<int> gt_id(0, 2), pred_id(-1, 3);
  std::vector<int> gt_inst(n), sem(n, 0), pred_ids(n);
  for (int i = 0; i < n; ++i) {
    gt_inst[i] = gt_id(rng);
    pred_ids[i] = pred_id(rng);
  }
  std::map<int, double> conf{{0, 0.9}, {1, 0.7}, {2, 0.5}, {3, 0.3}};
  const auto base = instance_ap(make_label(pred_ids, conf), sem, gt_inst, sem, {0});

  // Relabel prediction ids through an arbitrary injection.
  auto remap = [](int id) { return id < 0 ? id : id * 7 + 3; };
  std::vector<int> relabeled(n);
  for (int i = 0; i < n; ++i) relabeled[i] = remap(pred_ids[i]);
  std::map<int, double> conf2;
  for (const auto& [id, c] : conf) conf2[remap(id)] = c;
  const auto moved = instance_ap(make_label(relabeled, conf2), sem, gt_inst, sem, {0});
  CHECK(moved.map == base.map);
  CHECK(moved.map50 == base.map50);
  CHECK(moved.map25 == base.map25);
}

TEST_CASE("a zero-confidence non-overlapping prediction never raises ap") {
  std::vector<int> gt_inst(12, -1), sem(12, 0);
  for (int i = 0; i < 4; ++i) gt_inst[i] = 1;
  for (int i = 4; i < 8; ++i) gt_inst[i] = 2;
  std::vector<int> ids(12, -1);
  for (int i = 0; i < 4; ++i) ids[i] = 5;
  for (int i = 4; i < 7; ++i) ids[i] = 6;
  const auto before =
      instance_ap(make_label(ids, {{5, 0.9}, {6, 0.4}}), sem, gt_inst, sem, {0});
  for (int i = 8; i < 12; ++i) ids[i] = 99;  // pure background points
  const auto after =
      instance_ap(make_label(ids, {{5, 0.9}, {6, 0.4}, {99, 0.0}}), sem, gt_inst, sem, {0});
  CHECK(after.map <= before.map);
  CHECK(after.map50 <= before.map50);
  CHECK(after.map25 <= before.map25);
}

TEST_CASE("evaluating ground truth against itself scores 1 everywhere") {
  SceneSpec spec;
  spec.rng_seed = 77;
  const auto scene = generate_scene(spec);
  InstanceLabeling pred;
  pred.instance_ids = *scene.gt_instances;
  for (int id : pred.instance_ids)
    if (id >= 0) pred.confidences[id] = 1.0;
  const auto report = evaluate_scene(scene, pred);
  CHECK(report.miou == 1.0);
  CHECK(report.map == 1.0);
  CHECK(report.map50 == 1.0);
  CHECK(report.map25 == 1.0);
  CHECK(report.mpre50 == 1.0);
  CHECK(report.mrec50 == 1.0);
  CHECK(report.gt_instance_count == 4);
  CHECK(report.pred_instance_count == 4);
  CHECK(report.scene_count == 1);
}

TEST_CASE("an all-unassigned prediction scores zero ap") {
  SceneSpec spec;
  spec.rng_seed = 78;
  const auto scene = generate_scene(spec);
  InstanceLabeling pred;
  pred.instance_ids.assign(scene.size(), -1);
  const auto report = evaluate_scene(scene, pred);
  CHECK(report.map == 0.0);
  CHECK(report.map50 == 0.0);
  CHECK(report.map25 == 0.0);
  CHECK(report.mpre50 == 0.0);
  CHECK(report.mrec50 == 0.0);
  CHECK(report.pred_instance_count == 0);
}

TEST_CASE("gt classes fall back to weak annotations when absent") {
  SceneBundle scene;
  scene.name = "manual";
  for (int i = 0; i < 6; ++i) scene.cloud.points.push_back(Vec3(i, 0, 0));
  scene.semantics.labels = {1, 1, 1, 0, 0, 0};
  scene.semantics.foreground_classes = {0, 1};
  scene.offsets.offsets.assign(6, Vec3::Zero());
  scene.gt_instances = std::vector<int>{0, 0, 0, 1, 1, 1};
  scene.weak.entries = {{0, 1, 0}, {3, 0, 1}};

  InstanceLabeling pred;
  pred.instance_ids = *scene.gt_instances;
  pred.confidences = {{0, 1.0}, {1, 1.0}};
  const auto report = evaluate_scene(scene, pred);
  CHECK(report.map50 == 1.0);
  CHECK(report.miou == 1.0);
}

TEST_CASE("write_report produces parseable json and a mean row per metric") {
  EvalReport report;
  report.iou = {{0, 0.5}, {1, 0.75}};
  report.ap = {{0, 0.25}, {1, 0.5}};
  report.ap50 = {{0, 0.5}, {1, 0.75}};
  report.ap25 = {{0, 1.0}, {1, 1.0}};
  report.miou = 0.625;
  report.map = 0.375;
  report.map50 = 0.625;
  report.map25 = 1.0;
  report.mpre50 = 0.8;
  report.mrec50 = 0.7;
  report.scene_count = 2;
  report.gt_instance_count = 8;
  report.pred_instance_count = 7;

  TempDir dir;
  write_report(dir.str(), report);

  std::ifstream json_in(dir.path() / "report.json");
  nlohmann::json j = nlohmann::json::parse(json_in);
  CHECK(j["miou"].get<double>() == 0.625);
  CHECK(j["map50"].get<double>() == 0.625);
  CHECK(j["scenes"].get<int>() == 2);
  CHECK(j["per_class"]["1"]["ap50"].get<double>() == 0.75);

  std::ifstream csv_in(dir.path() / "metrics.csv");
  std::string text((std::istreambuf_iterator<char>(csv_in)), {});
  CHECK(text.find("class,metric,value\n") == 0);
  CHECK(text.find("mean,map50,0.625") != std::string::npos);
  CHECK(text.find("0,iou,0.5") != std::string::npos);
  CHECK(text.find("mean,mrec50,0.7") != std::string::npos);
}

TEST_CASE("evaluate_scene validates its inputs") {
  SceneBundle scene;
  scene.cloud.points = {Vec3(0, 0, 0)};
  scene.semantics.labels = {0};
  scene.semantics.foreground_classes = {0};
  InstanceLabeling pred;
  pred.instance_ids = {0};
  pred.confidences = {{0, 1.0}};
  SUBCASE("missing ground truth") { CHECK_THROWS_AS(evaluate_scene(scene, pred), Error); }
  SUBCASE("length mismatch") {
    scene.gt_instances = std::vector<int>{0};
    pred.instance_ids = {0, 0};
    CHECK_THROWS_AS(evaluate_scene(scene, pred), Error);
  }
}
