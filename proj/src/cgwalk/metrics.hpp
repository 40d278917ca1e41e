#pragma once

#include <string>
#include <vector>

#include "cgwalk/scene.hpp"

namespace cgwalk {

struct ClassValue {
  int class_id = -1;
  double value = 0.0;
};

struct SemanticIou {
  std::vector<ClassValue> per_class;  // classes absent from both sides are skipped
  double mean = 0.0;
};

SemanticIou semantic_miou(const std::vector<int>& pred, const std::vector<int>& gt,
                          const std::vector<int>& classes);

// Default IoU threshold set for the averaged AP column: 0.50, 0.55, ..., 0.95.
std::vector<double> default_ap_thresholds();

struct ApResult {
  std::vector<ClassValue> ap;    // mean over the threshold set
  std::vector<ClassValue> ap50;  // threshold 0.50
  std::vector<ClassValue> ap25;  // threshold 0.25
  double map = 0.0;
  double map50 = 0.0;
  double map25 = 0.0;
};

// Class-aware instance AP. A predicted instance's class is the majority of
// its points' predicted semantics; a ground-truth instance's class comes from
// the ground-truth semantics (ties to the lowest class id in both cases).
// Per class, predictions sorted by descending confidence greedily claim the
// unmatched ground-truth mask of highest IoU; the precision-recall curve is
// integrated with all-point interpolation.
ApResult instance_ap(const InstanceLabeling& pred, const std::vector<int>& pred_semantics,
                     const std::vector<int>& gt_instances, const std::vector<int>& gt_semantics,
                     const std::vector<int>& classes,
                     const std::vector<double>& thresholds = default_ap_thresholds());

struct PrecisionRecall {
  double precision = 0.0;  // mean over classes of matched preds / total preds
  double recall = 0.0;     // mean over classes of matched GT / total GT
};

PrecisionRecall precision_recall_at_iou(const InstanceLabeling& pred,
                                        const std::vector<int>& pred_semantics,
                                        const std::vector<int>& gt_instances,
                                        const std::vector<int>& gt_semantics,
                                        const std::vector<int>& classes, double iou = 0.5);

struct EvalReport {
  std::vector<ClassValue> iou;
  std::vector<ClassValue> ap;
  std::vector<ClassValue> ap50;
  std::vector<ClassValue> ap25;
  double miou = 0.0;
  double map = 0.0;
  double map50 = 0.0;
  double map25 = 0.0;
  double mpre50 = 0.0;
  double mrec50 = 0.0;
  int scene_count = 0;
  int gt_instance_count = 0;
  int pred_instance_count = 0;
};

// Evaluates one labeling against a scene's ground truth. Ground-truth
// semantics fall back to the class recorded in each instance's weak
// annotation when no explicit ground-truth semantic field is present.
EvalReport evaluate_scene(const SceneBundle& scene, const InstanceLabeling& pred);

// JSON rendering of a report, the content of report.json.
std::string report_json_text(const EvalReport& report);

// Writes report.json and metrics.csv (one row per class per metric, plus
// rows for the means under class "mean") into dir.
void write_report(const std::string& dir, const EvalReport& report);

}  // namespace cgwalk
