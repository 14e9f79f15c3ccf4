#pragma once

#include "wieat/csi_io.hpp"
#include "wieat/features.hpp"
#include "wieat/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <utility>
#include <vector>

namespace wieat {

struct UtensilTrainConfig {
  int epochs = 200;
  double lambda = 1e-3;
  std::uint64_t seed = 0;
  double temperature = 1.0;
  bool per_subcarrier = false;  // independent classifier per subcarrier instead of one shared

  void validate() const;
};

using ClassWeights = Eigen::Matrix<double, kUtensilCount, kFeatureCount>;
using ClassScores = Eigen::Matrix<double, kUtensilCount, 1>;
using ProbabilityMatrix = Eigen::Matrix<double, kSubcarriers, kUtensilCount>;
using SubcarrierWeights = Eigen::Matrix<double, kSubcarriers, 1>;

/// One-vs-rest linear classifiers over per-subcarrier standardized features.
struct UtensilModel {
  FeatureMatrix feature_mean = FeatureMatrix::Zero();
  FeatureMatrix feature_scale = FeatureMatrix::Ones();  // 0 marks a masked (constant) feature
  std::vector<ClassWeights> weights;                    // 1 entry when shared, 30 when per_subcarrier
  std::vector<ClassScores> biases;
  UtensilTrainConfig config;

  /// Row i = the four one-vs-rest margins of subcarrier i.
  ProbabilityMatrix margins(const FeatureMatrix& features) const;
};

using LabeledFeatures = std::pair<FeatureMatrix, Utensil>;

/// Full-batch hinge-loss subgradient descent with step 1/(lambda t) and projection onto the
/// 1/sqrt(lambda) ball; each example contributes one row per subcarrier.
UtensilModel train(const std::vector<LabeledFeatures>& dataset, const UtensilTrainConfig& config = {});

/// Row-wise softmax of margins / temperature.
ProbabilityMatrix subcarrier_probs(const UtensilModel& model, const FeatureMatrix& features);

/// Share of each subcarrier's amplitude variance over the segment; uniform when all are flat.
SubcarrierWeights subcarrier_weights(const CsiTrace& trace, const ActivitySegment& seg);

struct UtensilDecision {
  Utensil label = Utensil::Fork;
  ClassScores fused_scores = ClassScores::Zero();
  ProbabilityMatrix per_subcarrier_probs = ProbabilityMatrix::Zero();
  double total_probability = 0.0;  // sum of every per-subcarrier probability
};

/// fused[c] = sum_i probs(i, c) * w_i; argmax with ties to the earlier class.
UtensilDecision soft_decision(const ProbabilityMatrix& probs, const SubcarrierWeights& weights);

/// Majority vote of the per-subcarrier argmax labels (ties to the earlier class).
Utensil hard_vote(const ProbabilityMatrix& probs);

UtensilDecision classify(const UtensilModel& model, const CsiTrace& trace, const ActivitySegment& seg, int threads = 1);

void to_json(nlohmann::json& j, const UtensilTrainConfig& c);
void from_json(const nlohmann::json& j, UtensilTrainConfig& c);
void to_json(nlohmann::json& j, const UtensilModel& m);
void from_json(const nlohmann::json& j, UtensilModel& m);
void to_json(nlohmann::json& j, const UtensilDecision& d);

}  // namespace wieat
