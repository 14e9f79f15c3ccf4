#include "wieat/eating_detect.hpp"

#include "wieat/error.hpp"
#include "wieat/json_eigen.hpp"
#include "wieat/stats.hpp"

#include <cmath>
#include <random>

namespace wieat {

using json_eigen::matrix_from_json;
using json_eigen::matrix_to_json;
using json_eigen::optional_field;
using json_eigen::vector_from_json;
using json_eigen::vector_to_json;

void EatingDetectorParams::validate() const {
  if (!(threshold_scale > 0.0)) throw Error(ErrorCode::InvalidConfig, "threshold_scale must be positive");
  if (!(threshold_quantile >= 0.0 && threshold_quantile <= 1.0)) throw Error(ErrorCode::InvalidConfig, "threshold_quantile must lie in [0, 1]");
  if (max_iterations < 1) throw Error(ErrorCode::InvalidConfig, "max_iterations must be >= 1");
  if (!(tolerance >= 0.0)) throw Error(ErrorCode::InvalidConfig, "tolerance must be non-negative");
}

Eigen::Vector2d EatingDetector::project(const FeatureVector& v) const {
  FeatureVector z;
  for (Eigen::Index i = 0; i < kFeatureCount; ++i) {
    z(i) = feature_scale(i) > 0.0 ? (v(i) - feature_mean(i)) / feature_scale(i) : 0.0;
  }
  return components * z;
}

FeatureVector EatingDetector::inverse_project(const Eigen::Vector2d& p) const {
  const FeatureVector z = components.transpose() * p;
  return feature_mean + feature_scale.cwiseProduct(z);
}

KMeansResult kmeans(const MatrixXd& points, int k, std::uint64_t seed, int max_iterations, double tolerance) {
  const Eigen::Index n = points.rows();
  if (k < 1 || n < k) throw Error(ErrorCode::InsufficientData, "k-means needs at least k points");
  std::mt19937_64 rng(seed);
  KMeansResult out;
  out.centroids.resize(k, points.cols());
  out.centroids.row(0) = points.row(std::uniform_int_distribution<Eigen::Index>(0, n - 1)(rng));
  VectorXd d2(n);
  for (int c = 1; c < k; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int m = 0; m < c; ++m) best = std::min(best, (points.row(i) - out.centroids.row(m)).squaredNorm());
      d2(i) = best;
    }
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
      double acc = 0.0;
      pick = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (d2(i) <= 0.0) continue;
        acc += d2(i);
        pick = i;
        if (acc > u) break;
      }
    }
    out.centroids.row(c) = points.row(pick);
  }

  out.labels.assign(static_cast<std::size_t>(n), 0);
  for (int it = 1; it <= max_iterations; ++it) {
    out.iterations = it;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = (points.row(i) - out.centroids.row(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        const double d = (points.row(i) - out.centroids.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      out.labels[static_cast<std::size_t>(i)] = best;
    }
    MatrixXd next = MatrixXd::Zero(k, points.cols());
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      next.row(out.labels[static_cast<std::size_t>(i)]) += points.row(i);
      ++counts[static_cast<std::size_t>(out.labels[static_cast<std::size_t>(i)])];
    }
    double shift = 0.0;
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] == 0) {
        next.row(c) = out.centroids.row(c);
      } else {
        next.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
      }
      shift = std::max(shift, (next.row(c) - out.centroids.row(c)).norm());
    }
    out.centroids = next;
    if (shift <= tolerance) break;
  }
  return out;
}

EatingDetector fit_detector(const std::vector<FeatureVector>& eating, const std::vector<FeatureVector>& non_eating,
                            const EatingDetectorParams& params) {
  params.validate();
  if (eating.size() < 3 || non_eating.size() < 3) {
    throw Error(ErrorCode::InsufficientData, "detector needs at least 3 vectors per class");
  }
  const auto n_eat = static_cast<Eigen::Index>(eating.size());
  const auto n = n_eat + static_cast<Eigen::Index>(non_eating.size());
  MatrixXd x(n, kFeatureCount);
  for (Eigen::Index i = 0; i < n; ++i) {
    x.row(i) = (i < n_eat ? eating[static_cast<std::size_t>(i)] : non_eating[static_cast<std::size_t>(i - n_eat)]).transpose();
  }
  if (!x.allFinite()) throw Error(ErrorCode::DegenerateData, "non-finite feature value in detector training data");

  EatingDetector det;
  det.params = params;
  det.feature_mean = x.colwise().mean().transpose();
  MatrixXd z = x.rowwise() - det.feature_mean.transpose();
  int kept = 0;
  for (Eigen::Index f = 0; f < kFeatureCount; ++f) {
    const double sd = std::sqrt(z.col(f).squaredNorm() / static_cast<double>(n));
    if (sd > 1e-12 * std::max(1.0, std::abs(det.feature_mean(f)))) {
      det.feature_scale(f) = sd;
      z.col(f) /= sd;
      ++kept;
    } else {
      det.feature_scale(f) = 0.0;
      z.col(f).setZero();
    }
  }
  if (kept == 0) throw Error(ErrorCode::DegenerateData, "every feature is constant across the training set");

  const MatrixXd cov = z.transpose() * z / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov);
  for (int r = 0; r < 2; ++r) {
    VectorXd axis = eig.eigenvectors().col(kFeatureCount - 1 - r);
    Eigen::Index lead = 0;
    axis.cwiseAbs().maxCoeff(&lead);
    if (axis(lead) < 0.0) axis = -axis;
    det.components.row(r) = axis.transpose();
  }

  const MatrixXd projected = z * det.components.transpose();
  const KMeansResult km = kmeans(projected, 2, params.seed, params.max_iterations, params.tolerance);
  std::array<double, 2> eat_count{0, 0}, size{0, 0};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(km.labels[static_cast<std::size_t>(i)]);
    size[c] += 1.0;
    if (i < n_eat) eat_count[c] += 1.0;
  }
  auto fraction = [&](std::size_t c) { return size[c] > 0.0 ? eat_count[c] / size[c] : 0.0; };
  int eat_cluster = 0;
  if (fraction(1) > fraction(0) || (fraction(1) == fraction(0) && eat_count[1] > eat_count[0])) eat_cluster = 1;
  det.eating_centroid = km.centroids.row(eat_cluster).transpose();
  det.other_centroid = km.centroids.row(1 - eat_cluster).transpose();

  VectorXd dist(n_eat);
  for (Eigen::Index i = 0; i < n_eat; ++i) dist(i) = (projected.row(i).transpose() - det.eating_centroid).norm();
  det.threshold = params.threshold_scale * quantile(dist, params.threshold_quantile);
  return det;
}

EatingVerdict is_eating(const EatingDetector& detector, const FeatureVector& v) {
  EatingVerdict out;
  out.distance = (detector.project(v) - detector.eating_centroid).norm();
  out.eating = out.distance <= detector.threshold;
  return out;
}

void to_json(nlohmann::json& j, const EatingDetectorParams& p) {
  j = {{"threshold_scale", p.threshold_scale},
       {"threshold_quantile", p.threshold_quantile},
       {"max_iterations", p.max_iterations},
       {"tolerance", p.tolerance},
       {"seed", p.seed}};
}

void from_json(const nlohmann::json& j, EatingDetectorParams& p) {
  optional_field(j, "threshold_scale", p.threshold_scale);
  optional_field(j, "threshold_quantile", p.threshold_quantile);
  optional_field(j, "max_iterations", p.max_iterations);
  optional_field(j, "tolerance", p.tolerance);
  optional_field(j, "seed", p.seed);
}

void to_json(nlohmann::json& j, const EatingDetector& d) {
  j = {{"kind", "eating_detector"},
       {"feature_mean", vector_to_json(d.feature_mean)},
       {"feature_scale", vector_to_json(d.feature_scale)},
       {"components", matrix_to_json(d.components)},
       {"eating_centroid", vector_to_json(d.eating_centroid)},
       {"other_centroid", vector_to_json(d.other_centroid)},
       {"threshold", d.threshold},
       {"params", d.params}};
}

void from_json(const nlohmann::json& j, EatingDetector& d) {
  if (!j.is_object() || j.value("kind", "") != "eating_detector") throw Error(ErrorCode::InvalidModel, "not an eating detector document");
  try {
    vector_from_json(j.at("feature_mean"), d.feature_mean, "feature_mean");
    vector_from_json(j.at("feature_scale"), d.feature_scale, "feature_scale");
    matrix_from_json(j.at("components"), d.components, "components");
    vector_from_json(j.at("eating_centroid"), d.eating_centroid, "eating_centroid");
    vector_from_json(j.at("other_centroid"), d.other_centroid, "other_centroid");
    d.threshold = json_eigen::finite_number(j.at("threshold"), "threshold");
    if (j.contains("params")) d.params = j.at("params").get<EatingDetectorParams>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidModel, std::string("eating detector: ") + e.what());
  }
  if ((d.feature_scale.array() < 0.0).any() || d.threshold < 0.0) throw Error(ErrorCode::InvalidModel, "negative scale or threshold");
  const Eigen::Matrix2d gram = d.components * d.components.transpose();
  if (!gram.isApprox(Eigen::Matrix2d::Identity(), 1e-9)) throw Error(ErrorCode::InvalidModel, "PCA components are not orthonormal");
}

}  // namespace wieat
