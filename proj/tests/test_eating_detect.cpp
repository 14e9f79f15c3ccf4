#include "doctest.h"
#include "support.hpp"

#include "wieat/eating_detect.hpp"

#include <json.hpp>

using namespace wieat;

namespace {

std::vector<FeatureVector> cloud(std::mt19937_64& rng, int n, double centre, double spread) {
  std::normal_distribution<double> g(0.0, spread);
  std::vector<FeatureVector> out;
  for (int i = 0; i < n; ++i) {
    FeatureVector v;
    for (int k = 0; k < kFeatureCount; ++k) v(k) = centre * (k % 3 == 0 ? 1.0 : 0.3) + g(rng);
    out.push_back(v);
  }
  return out;
}

}  // namespace

TEST_CASE("kmeans separates two blobs deterministically") {
  std::mt19937_64 rng(1);
  MatrixXd pts(40, 2);
  std::normal_distribution<double> g(0.0, 0.1);
  for (int i = 0; i < 40; ++i) {
    const double c = i < 20 ? -5.0 : 5.0;
    pts(i, 0) = c + g(rng);
    pts(i, 1) = g(rng);
  }
  const auto a = kmeans(pts, 2, 9);
  const auto b = kmeans(pts, 2, 9);
  CHECK(a.centroids == b.centroids);
  CHECK(a.labels == b.labels);
  for (int i = 1; i < 20; ++i) CHECK(a.labels[static_cast<std::size_t>(i)] == a.labels[0]);
  for (int i = 21; i < 40; ++i) CHECK(a.labels[static_cast<std::size_t>(i)] == a.labels[20]);
  CHECK(a.labels[0] != a.labels[20]);
}

TEST_CASE("kmeans on duplicated points") {
  MatrixXd pts = MatrixXd::Ones(6, 3);
  const auto r = kmeans(pts, 2, 0);
  CHECK(r.centroids.rows() == 2);
  CHECK(r.centroids.allFinite());
  for (int l : r.labels) CHECK(l >= 0);
}

TEST_CASE("fit_detector separates clouds and round-trips") {
  std::mt19937_64 rng(7);
  const auto eat = cloud(rng, 30, 3.0, 0.5);
  const auto other = cloud(rng, 30, -3.0, 0.5);
  const EatingDetector d = fit_detector(eat, other);
  int correct = 0;
  for (const auto& v : cloud(rng, 20, 3.0, 0.5)) correct += is_eating(d, v).eating;
  for (const auto& v : cloud(rng, 20, -3.0, 0.5)) correct += !is_eating(d, v).eating;
  CHECK(correct >= 38);

  // rows of the projection are orthonormal; inverse projection is a right inverse
  CHECK((d.components * d.components.transpose() - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-9);
  const Eigen::Vector2d p(0.3, -1.2);
  CHECK((d.project(d.inverse_project(p)) - p).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(is_eating(d, d.inverse_project(d.eating_centroid)).distance == doctest::Approx(0.0).scale(1.0));

  const nlohmann::json j = d;
  const EatingDetector back = j.get<EatingDetector>();
  CHECK(nlohmann::json(back).dump() == j.dump());
  CHECK(fit_detector(eat, other).threshold == d.threshold);
}

TEST_CASE("fit_detector input checks") {
  std::mt19937_64 rng(2);
  const auto eat = cloud(rng, 2, 1.0, 0.1);
  const auto other = cloud(rng, 5, -1.0, 0.1);
  CHECK_THROWS_AS(fit_detector(eat, other), Error);
  const std::vector<FeatureVector> flat(5, FeatureVector::Constant(1.0));
  try {
    fit_detector(flat, flat);
    FAIL("expected DegenerateData");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateData);
  }
}

TEST_CASE("constant features are dropped") {
  std::mt19937_64 rng(3);
  auto eat = cloud(rng, 10, 2.0, 0.4);
  auto other = cloud(rng, 10, -2.0, 0.4);
  for (auto* set : {&eat, &other}) {
    for (auto& v : *set) v(5) = 7.0;
  }
  const EatingDetector d = fit_detector(eat, other);
  CHECK(d.feature_scale(5) == 0.0);
  CHECK(d.components.col(5).isZero());
  FeatureVector probe = eat[0];
  const double base = is_eating(d, probe).distance;
  probe(5) = -1e6;
  CHECK(is_eating(d, probe).distance == base);
}

TEST_CASE("corrupt model json is rejected") {
  std::mt19937_64 rng(4);
  nlohmann::json j = fit_detector(cloud(rng, 5, 1.0, 0.3), cloud(rng, 5, -1.0, 0.3));
  j["components"][0][0] = 5.0;
  CHECK_THROWS_AS(j.get<EatingDetector>(), Error);
  j.erase("components");
  CHECK_THROWS(j.get<EatingDetector>());
}
