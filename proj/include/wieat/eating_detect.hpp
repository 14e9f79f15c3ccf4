#pragma once

#include "wieat/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <vector>

namespace wieat {

struct EatingDetectorParams {
  double threshold_scale = 1.5;
  double threshold_quantile = 0.95;
  int max_iterations = 100;
  double tolerance = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
};

/// z-score -> 2-component PCA -> distance to the eating cluster centroid.
struct EatingDetector {
  FeatureVector feature_mean = FeatureVector::Zero();
  FeatureVector feature_scale = FeatureVector::Ones();  // 0 marks a dropped (constant) feature
  Eigen::Matrix<double, 2, kFeatureCount> components = Eigen::Matrix<double, 2, kFeatureCount>::Zero();
  Eigen::Vector2d eating_centroid = Eigen::Vector2d::Zero();
  Eigen::Vector2d other_centroid = Eigen::Vector2d::Zero();
  double threshold = 0.0;
  EatingDetectorParams params;

  Eigen::Vector2d project(const FeatureVector& v) const;
  /// A feature vector whose projection is `p` (mean plus the back-projected offset).
  FeatureVector inverse_project(const Eigen::Vector2d& p) const;
};

struct KMeansResult {
  MatrixXd centroids;               // k x d
  std::vector<int> labels;
  int iterations = 0;
};

/// Lloyd's algorithm from a k-means++ start drawn with a seeded generator. Candidate selection walks the
/// cumulative D^2 mass, so ties resolve to the lowest index. Empty clusters keep their previous centroid.
KMeansResult kmeans(const MatrixXd& points, int k, std::uint64_t seed, int max_iterations = 100, double tolerance = 1e-8);

/// Requires >= 3 vectors per class. Constant features are dropped; DegenerateData if all are constant.
EatingDetector fit_detector(const std::vector<FeatureVector>& eating, const std::vector<FeatureVector>& non_eating,
                            const EatingDetectorParams& params = {});

struct EatingVerdict {
  bool eating = false;
  double distance = 0.0;
};

EatingVerdict is_eating(const EatingDetector& detector, const FeatureVector& v);

void to_json(nlohmann::json& j, const EatingDetectorParams& p);
void from_json(const nlohmann::json& j, EatingDetectorParams& p);
void to_json(nlohmann::json& j, const EatingDetector& d);
void from_json(const nlohmann::json& j, EatingDetector& d);

}  // namespace wieat
