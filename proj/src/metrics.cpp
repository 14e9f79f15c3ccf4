#include "wieat/metrics.hpp"

#include "wieat/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace wieat {

double detection_rate(long detected, long total) {
  if (total <= 0) throw Error(ErrorCode::ZeroTotal, "detection rate needs a positive total");
  if (detected < 0 || detected > total) throw Error(ErrorCode::InvalidArgument, "detected count must lie in [0, total]");
  return static_cast<double>(detected) / static_cast<double>(total);
}

double accuracy(long correct, long total) {
  if (total <= 0) throw Error(ErrorCode::ZeroTotal, "accuracy needs a positive total");
  if (correct < 0 || correct > total) throw Error(ErrorCode::InvalidArgument, "correct count must lie in [0, total]");
  return static_cast<double>(correct) / static_cast<double>(total);
}

double percentage_error(double estimated, double ground_truth) {
  if (!(ground_truth > 0.0)) throw Error(ErrorCode::ZeroGroundTruth, "percentage error needs a positive ground truth");
  if (!(estimated >= 0.0)) throw Error(ErrorCode::InvalidArgument, "estimate must be non-negative");
  return std::abs(estimated - ground_truth) / ground_truth;
}

double segment_iou(const ActivitySegment& a, const ActivitySegment& b) {
  const double inter = std::max(0.0, std::min(a.end_s, b.end_s) - std::max(a.start_s, b.start_s));
  const double union_len = (a.end_s - a.start_s) + (b.end_s - b.start_s) - inter;
  if (!(union_len > 0.0)) return 0.0;
  return inter / union_len;
}

std::vector<std::pair<std::size_t, std::size_t>> match_segments(const std::vector<ActivitySegment>& detected,
                                                                const std::vector<ActivitySegment>& truth, double min_iou) {
  struct Candidate {
    double iou;
    std::size_t d, t;
  };
  std::vector<Candidate> cand;
  for (std::size_t d = 0; d < detected.size(); ++d) {
    for (std::size_t t = 0; t < truth.size(); ++t) {
      const double iou = segment_iou(detected[d], truth[t]);
      if (iou >= min_iou && iou > 0.0) cand.push_back({iou, d, t});
    }
  }
  std::stable_sort(cand.begin(), cand.end(), [](const Candidate& a, const Candidate& b) { return a.iou > b.iou; });
  std::vector<bool> used_d(detected.size(), false), used_t(truth.size(), false);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const Candidate& c : cand) {
    if (used_d[c.d] || used_t[c.t]) continue;
    used_d[c.d] = used_t[c.t] = true;
    out.emplace_back(c.d, c.t);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double confusion_accuracy(const ConfusionMatrix& confusion) {
  return accuracy(confusion.trace(), confusion.sum());
}

namespace {

ActivitySegment segment_from(const nlohmann::json& j) {
  ActivitySegment s;
  s.start_s = j.at("start_s").get<double>();
  s.end_s = j.at("end_s").get<double>();
  s.start_idx = j.value("start_idx", Eigen::Index{0});
  s.end_idx = j.value("end_idx", Eigen::Index{0});
  return s;
}

long count_in(const std::vector<double>& times, double lo, double hi) {
  return std::count_if(times.begin(), times.end(), [&](double t) { return t >= lo && t < hi; });
}

}  // namespace

EvalReport evaluate(const nlohmann::json& result, const nlohmann::json& truth, double min_iou) {
  EvalReport report;
  try {
    std::vector<ActivitySegment> deliveries;
    std::vector<Utensil> true_labels;
    for (const auto& s : truth.at("segments")) {
      if (s.at("kind").get<std::string>() != "delivery") continue;
      deliveries.push_back(segment_from(s));
      const auto u = parse_utensil(s.at("label").get<std::string>());
      if (!u) throw Error(ErrorCode::InvalidArgument, "unknown utensil label in ground truth");
      true_labels.push_back(*u);
    }
    std::vector<ActivitySegment> eating;
    std::vector<std::optional<Utensil>> predicted;
    for (const auto& s : result.at("segments")) {
      if (!s.at("eating").get<bool>()) continue;
      eating.push_back(segment_from(s));
      const auto& u = s.at("utensil");
      predicted.push_back(u.is_null() ? std::nullopt : parse_utensil(u.at("label").get<std::string>()));
    }
    const auto matches = match_segments(eating, deliveries, min_iou);
    report.detection_rate = detection_rate(static_cast<long>(matches.size()), static_cast<long>(deliveries.size()));
    for (const auto& [d, t] : matches) {
      if (predicted[d]) ++report.confusion(static_cast<int>(true_labels[t]), static_cast<int>(*predicted[d]));
    }
    if (report.confusion.sum() > 0) report.accuracy = confusion_accuracy(report.confusion);

    const auto chews = truth.at("chew_times_s").get<std::vector<double>>();
    const auto swallows = truth.at("swallow_times_s").get<std::vector<double>>();
    double chew_err = 0.0, swallow_err = 0.0;
    int chew_n = 0, swallow_n = 0;
    for (const auto& iv : result.at("intervals")) {
      const double lo = iv.at("start_s").get<double>();
      const double hi = iv.at("end_s").get<double>();
      const long tc = count_in(chews, lo, hi);
      const long ts = count_in(swallows, lo, hi);
      if (tc > 0) {
        chew_err += percentage_error(iv.at("chew_count").get<double>(), static_cast<double>(tc));
        ++chew_n;
      }
      if (ts > 0) {
        swallow_err += percentage_error(iv.at("swallow_count").get<double>(), static_cast<double>(ts));
        ++swallow_n;
      }
    }
    if (chew_n > 0) report.percentage_errors["chew_count"] = chew_err / chew_n;
    if (swallow_n > 0) report.percentage_errors["swallow_count"] = swallow_err / swallow_n;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("evaluation input: ") + e.what());
  }
  return report;
}

void to_json(nlohmann::json& j, const EvalReport& r) {
  nlohmann::json confusion = nlohmann::json::array();
  for (Eigen::Index i = 0; i < kUtensilCount; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < kUtensilCount; ++k) row.push_back(r.confusion(i, k));
    confusion.push_back(std::move(row));
  }
  j = {{"detection_rate", r.detection_rate},
       {"accuracy", r.accuracy},
       {"percentage_errors", r.percentage_errors},
       {"confusion_labels", kUtensilNames},
       {"confusion", std::move(confusion)}};
}

std::string confusion_csv(const ConfusionMatrix& confusion) {
  std::ostringstream out;
  out << "truth";
  for (const auto name : kUtensilNames) out << ',' << name;
  out << '\n';
  for (Eigen::Index i = 0; i < kUtensilCount; ++i) {
    out << kUtensilNames[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < kUtensilCount; ++k) out << ',' << confusion(i, k);
    out << '\n';
  }
  return out.str();
}

}  // namespace wieat
