#include "cgwalk/metrics.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "cgwalk/error.hpp"
#include "cgwalk/util.hpp"

namespace cgwalk {

SemanticIou semantic_miou(const std::vector<int>& pred, const std::vector<int>& gt,
                          const std::vector<int>& classes) {
  if (pred.size() != gt.size())
    fail(ErrorCode::kLengthMismatch, "prediction and ground truth differ in length");
  if (classes.empty()) fail(ErrorCode::kBadArgument, "class list must not be empty");
  std::vector<int> sorted_classes = classes;
  std::sort(sorted_classes.begin(), sorted_classes.end());
  sorted_classes.erase(std::unique(sorted_classes.begin(), sorted_classes.end()),
                       sorted_classes.end());

  SemanticIou out;
  double total = 0.0;
  for (int c : sorted_classes) {
    long inter = 0, uni = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const bool p = pred[i] == c;
      const bool g = gt[i] == c;
      inter += p && g;
      uni += p || g;
    }
    if (uni == 0) continue;  // class absent from both sides
    const double iou = static_cast<double>(inter) / static_cast<double>(uni);
    out.per_class.push_back({c, iou});
    total += iou;
  }
  out.mean = out.per_class.empty() ? 0.0 : total / out.per_class.size();
  return out;
}

std::vector<double> default_ap_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back(0.50 + 0.05 * i);
  return t;
}

namespace {

struct Mask {
  int id = -1;
  double confidence = 0.0;
  int size = 0;
};

// Majority class of a mask's points, ties to the lowest class id.
int majority_class(const std::map<int, int>& votes) {
  int best_class = -1;
  int best_count = 0;
  for (const auto& [cls, cnt] : votes)
    if (cnt > best_count) {
      best_count = cnt;
      best_class = cls;
    }
  return best_class;
}

struct ClassMatchInput {
  std::vector<Mask> preds;  // sorted by confidence desc, id asc
  std::vector<Mask> gts;    // ordered by id
  // iou[p][g] for every pred/gt pair of this class.
  std::vector<std::vector<double>> iou;
};

// Greedy matching at one threshold. Returns per-pred hit flags and the
// matched-GT count.
std::pair<std::vector<char>, int> greedy_match(const ClassMatchInput& cls, double threshold) {
  std::vector<char> hit(cls.preds.size(), 0);
  std::vector<char> taken(cls.gts.size(), 0);
  int matched = 0;
  for (std::size_t p = 0; p < cls.preds.size(); ++p) {
    int best = -1;
    double best_iou = 0.0;
    for (std::size_t g = 0; g < cls.gts.size(); ++g) {
      if (taken[g]) continue;
      const double v = cls.iou[p][g];
      if (v > best_iou) {
        best_iou = v;
        best = static_cast<int>(g);
      }
    }
    if (best >= 0 && best_iou >= threshold) {
      hit[p] = 1;
      taken[best] = 1;
      ++matched;
    }
  }
  return {std::move(hit), matched};
}

// All-point interpolated average precision from ordered hit flags.
double average_precision(const std::vector<char>& hit, int gt_count) {
  if (gt_count == 0) return 0.0;
  const std::size_t n = hit.size();
  std::vector<double> precision(n), recall(n);
  int tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    tp += hit[i];
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / static_cast<double>(gt_count);
  }
  // Precision envelope from the right, then integrate over recall steps.
  for (std::size_t i = n; i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return ap;
}

// Groups predictions and ground truth into per-class mask lists with
// precomputed pairwise IoU.
std::map<int, ClassMatchInput> build_match_inputs(const InstanceLabeling& pred,
                                                  const std::vector<int>& pred_semantics,
                                                  const std::vector<int>& gt_instances,
                                                  const std::vector<int>& gt_semantics,
                                                  const std::vector<int>& classes) {
  const std::size_t n = gt_instances.size();
  if (pred.instance_ids.size() != n || pred_semantics.size() != n || gt_semantics.size() != n)
    fail(ErrorCode::kLengthMismatch, "per-point arrays differ in length");

  struct Group {
    std::map<int, int> class_votes;
    std::vector<int> points;
  };
  std::map<int, Group> pred_groups, gt_groups;
  for (std::size_t i = 0; i < n; ++i) {
    if (pred.instance_ids[i] >= 0) {
      auto& g = pred_groups[pred.instance_ids[i]];
      g.class_votes[pred_semantics[i]] += 1;
      g.points.push_back(static_cast<int>(i));
    }
    if (gt_instances[i] >= 0) {
      auto& g = gt_groups[gt_instances[i]];
      g.class_votes[gt_semantics[i]] += 1;
      g.points.push_back(static_cast<int>(i));
    }
  }

  std::vector<int> sorted_classes = classes;
  std::sort(sorted_classes.begin(), sorted_classes.end());
  sorted_classes.erase(std::unique(sorted_classes.begin(), sorted_classes.end()),
                       sorted_classes.end());

  std::map<int, ClassMatchInput> out;
  std::map<int, std::vector<int>> gt_ids_of_class;   // class -> gt ids
  std::map<int, int> gt_slot;                        // gt id -> slot in its class list
  for (const auto& [id, g] : gt_groups) {
    const int cls = majority_class(g.class_votes);
    if (!std::binary_search(sorted_classes.begin(), sorted_classes.end(), cls)) continue;
    auto& input = out[cls];
    gt_slot[id] = static_cast<int>(input.gts.size());
    input.gts.push_back({id, 0.0, static_cast<int>(g.points.size())});
    gt_ids_of_class[cls].push_back(id);
  }

  for (const auto& [id, g] : pred_groups) {
    const int cls = majority_class(g.class_votes);
    if (!std::binary_search(sorted_classes.begin(), sorted_classes.end(), cls)) continue;
    auto cit = pred.confidences.find(id);
    if (cit == pred.confidences.end())
      fail(ErrorCode::kBadArgument,
           "predicted instance " + std::to_string(id) + " has no confidence");
    auto& input = out[cls];
    input.preds.push_back({id, cit->second, static_cast<int>(g.points.size())});
  }

  for (auto& [cls, input] : out) {
    std::stable_sort(input.preds.begin(), input.preds.end(), [](const Mask& a, const Mask& b) {
      if (a.confidence != b.confidence) return a.confidence > b.confidence;
      return a.id < b.id;
    });
    input.iou.assign(input.preds.size(), std::vector<double>(input.gts.size(), 0.0));
    for (std::size_t p = 0; p < input.preds.size(); ++p) {
      const auto& points = pred_groups.at(input.preds[p].id).points;
      std::unordered_map<int, int> overlap;
      for (int pt : points) {
        const int gid = gt_instances[pt];
        if (gid >= 0) {
          auto sit = gt_slot.find(gid);
          if (sit != gt_slot.end() &&
              sit->second < static_cast<int>(input.gts.size()) &&
              input.gts[sit->second].id == gid)
            overlap[sit->second] += 1;
        }
      }
      for (const auto& [slot, inter] : overlap) {
        const double uni = input.preds[p].size + input.gts[slot].size - inter;
        input.iou[p][slot] = inter / uni;
      }
    }
  }
  return out;
}

}  // namespace

ApResult instance_ap(const InstanceLabeling& pred, const std::vector<int>& pred_semantics,
                     const std::vector<int>& gt_instances, const std::vector<int>& gt_semantics,
                     const std::vector<int>& classes, const std::vector<double>& thresholds) {
  if (thresholds.empty()) fail(ErrorCode::kBadArgument, "threshold list must not be empty");
  const auto inputs =
      build_match_inputs(pred, pred_semantics, gt_instances, gt_semantics, classes);

  ApResult out;
  double sum_ap = 0.0, sum_50 = 0.0, sum_25 = 0.0;
  int counted = 0;
  for (const auto& [cls, input] : inputs) {
    if (input.preds.empty() && input.gts.empty()) continue;
    const int gt_count = static_cast<int>(input.gts.size());
    double mean_over_thresholds = 0.0;
    for (double t : thresholds)
      mean_over_thresholds += average_precision(greedy_match(input, t).first, gt_count);
    mean_over_thresholds /= static_cast<double>(thresholds.size());
    const double v50 = average_precision(greedy_match(input, 0.50).first, gt_count);
    const double v25 = average_precision(greedy_match(input, 0.25).first, gt_count);
    out.ap.push_back({cls, mean_over_thresholds});
    out.ap50.push_back({cls, v50});
    out.ap25.push_back({cls, v25});
    sum_ap += mean_over_thresholds;
    sum_50 += v50;
    sum_25 += v25;
    ++counted;
  }
  if (counted > 0) {
    out.map = sum_ap / counted;
    out.map50 = sum_50 / counted;
    out.map25 = sum_25 / counted;
  }
  return out;
}

PrecisionRecall precision_recall_at_iou(const InstanceLabeling& pred,
                                        const std::vector<int>& pred_semantics,
                                        const std::vector<int>& gt_instances,
                                        const std::vector<int>& gt_semantics,
                                        const std::vector<int>& classes, double iou) {
  const auto inputs =
      build_match_inputs(pred, pred_semantics, gt_instances, gt_semantics, classes);
  double sum_pre = 0.0, sum_rec = 0.0;
  int counted = 0;
  for (const auto& [cls, input] : inputs) {
    if (input.preds.empty() && input.gts.empty()) continue;
    const auto [hit, matched] = greedy_match(input, iou);
    const double pre =
        input.preds.empty() ? 0.0 : static_cast<double>(matched) / input.preds.size();
    const double rec =
        input.gts.empty() ? 0.0 : static_cast<double>(matched) / input.gts.size();
    sum_pre += pre;
    sum_rec += rec;
    ++counted;
  }
  PrecisionRecall out;
  if (counted > 0) {
    out.precision = sum_pre / counted;
    out.recall = sum_rec / counted;
  }
  return out;
}

EvalReport evaluate_scene(const SceneBundle& scene, const InstanceLabeling& pred) {
  if (!scene.gt_instances)
    fail(ErrorCode::kBadArgument, "scene has no ground-truth instance labels");
  if (pred.instance_ids.size() != scene.cloud.points.size())
    fail(ErrorCode::kLengthMismatch, "labeling does not match the scene's point count");
  const std::vector<int>& gt_inst = *scene.gt_instances;

  std::vector<int> gt_sem;
  if (scene.gt_semantics) {
    gt_sem = *scene.gt_semantics;
  } else {
    // Each instance's class is recorded in its weak annotation.
    std::map<int, int> class_of;
    for (const auto& e : scene.weak.entries) class_of[e.instance_id] = e.semantic_id;
    gt_sem.assign(gt_inst.size(), -1);
    for (std::size_t i = 0; i < gt_inst.size(); ++i) {
      if (gt_inst[i] < 0) continue;
      auto it = class_of.find(gt_inst[i]);
      if (it == class_of.end())
        fail(ErrorCode::kBadArgument, "ground-truth instance " + std::to_string(gt_inst[i]) +
                                          " has no weak annotation to infer its class from");
      gt_sem[i] = it->second;
    }
  }

  EvalReport report;
  report.scene_count = 1;

  const SemanticIou sem = semantic_miou(scene.semantics.labels, gt_sem,
                                        scene.semantics.foreground_classes);
  report.iou = sem.per_class;
  report.miou = sem.mean;

  const ApResult ap = instance_ap(pred, scene.semantics.labels, gt_inst, gt_sem,
                                  scene.semantics.foreground_classes);
  report.ap = ap.ap;
  report.ap50 = ap.ap50;
  report.ap25 = ap.ap25;
  report.map = ap.map;
  report.map50 = ap.map50;
  report.map25 = ap.map25;

  const PrecisionRecall pr = precision_recall_at_iou(pred, scene.semantics.labels, gt_inst,
                                                     gt_sem, scene.semantics.foreground_classes);
  report.mpre50 = pr.precision;
  report.mrec50 = pr.recall;

  std::set<int> gt_ids, pred_ids;
  for (int id : gt_inst)
    if (id >= 0) gt_ids.insert(id);
  for (int id : pred.instance_ids)
    if (id >= 0) pred_ids.insert(id);
  report.gt_instance_count = static_cast<int>(gt_ids.size());
  report.pred_instance_count = static_cast<int>(pred_ids.size());
  return report;
}

std::string report_json_text(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["scenes"] = report.scene_count;
  j["gt_instances"] = report.gt_instance_count;
  j["pred_instances"] = report.pred_instance_count;
  j["miou"] = report.miou;
  j["map"] = report.map;
  j["map50"] = report.map50;
  j["map25"] = report.map25;
  j["mpre50"] = report.mpre50;
  j["mrec50"] = report.mrec50;
  nlohmann::ordered_json per_class = nlohmann::ordered_json::object();
  auto fill = [&per_class](const std::vector<ClassValue>& list, const char* key) {
    for (const auto& cv : list) per_class[std::to_string(cv.class_id)][key] = cv.value;
  };
  fill(report.iou, "iou");
  fill(report.ap, "ap");
  fill(report.ap50, "ap50");
  fill(report.ap25, "ap25");
  j["per_class"] = per_class;
  return j.dump(2) + "\n";
}

void write_report(const std::string& dir, const EvalReport& report) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  atomic_write_text((fs::path(dir) / "report.json").string(), report_json_text(report));

  std::ostringstream csv;
  csv << "class,metric,value\n";
  auto rows = [&csv](const std::vector<ClassValue>& list, const char* metric) {
    for (const auto& cv : list)
      csv << cv.class_id << ',' << metric << ',' << format_double(cv.value) << '\n';
  };
  rows(report.iou, "iou");
  rows(report.ap, "ap");
  rows(report.ap50, "ap50");
  rows(report.ap25, "ap25");
  csv << "mean,miou," << format_double(report.miou) << '\n';
  csv << "mean,map," << format_double(report.map) << '\n';
  csv << "mean,map50," << format_double(report.map50) << '\n';
  csv << "mean,map25," << format_double(report.map25) << '\n';
  csv << "mean,mpre50," << format_double(report.mpre50) << '\n';
  csv << "mean,mrec50," << format_double(report.mrec50) << '\n';
  atomic_write_text((fs::path(dir) / "metrics.csv").string(), csv.str());
}

}  // namespace cgwalk
