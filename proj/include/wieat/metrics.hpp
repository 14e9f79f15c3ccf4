#pragma once

#include "wieat/types.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace wieat {

using ConfusionMatrix = Eigen::Matrix<long, kUtensilCount, kUtensilCount>;  // rows: truth, cols: predicted

double detection_rate(long detected, long total);
double accuracy(long correct, long total);
double percentage_error(double estimated, double ground_truth);

/// Time-domain intersection over union of two segments.
double segment_iou(const ActivitySegment& a, const ActivitySegment& b);

/// Greedy one-to-one matching by descending IoU (ties to the earlier detected, then earlier truth
/// segment); pairs below min_iou are left unmatched. Returns (detected index, truth index) pairs.
std::vector<std::pair<std::size_t, std::size_t>> match_segments(const std::vector<ActivitySegment>& detected,
                                                                const std::vector<ActivitySegment>& truth,
                                                                double min_iou = 0.5);

/// Fraction of the confusion mass on the diagonal; ZeroTotal when empty.
double confusion_accuracy(const ConfusionMatrix& confusion);

struct EvalReport {
  double detection_rate = 0.0;
  double accuracy = 0.0;
  std::map<std::string, double> percentage_errors;
  ConfusionMatrix confusion = ConfusionMatrix::Zero();
};

/// Scores a pipeline result document against a ground-truth document: delivery detection rate,
/// utensil accuracy over matched deliveries, and chew/swallow count percentage errors pooled
/// over the reported intervals.
EvalReport evaluate(const nlohmann::json& result, const nlohmann::json& truth, double min_iou = 0.5);

void to_json(nlohmann::json& j, const EvalReport& r);

/// CSV with a header row of predicted labels and one row per true label.
std::string confusion_csv(const ConfusionMatrix& confusion);

}  // namespace wieat
