#include "doctest.h"
#include "support.hpp"

#include "wieat/utensil.hpp"

#include <json.hpp>

using namespace wieat;

namespace {

std::vector<LabeledFeatures> toy_set(std::mt19937_64& rng, int per_class) {
  std::normal_distribution<double> g(0.0, 0.3);
  std::vector<LabeledFeatures> out;
  for (int c = 0; c < kUtensilCount; ++c) {
    for (int k = 0; k < per_class; ++k) {
      FeatureMatrix f;
      for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = g(rng);
      f.col(c).array() += 2.0;
      f.col(13).setConstant(1.0);  // constant column gets masked
      out.emplace_back(f, static_cast<Utensil>(c));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("soft decision matches the weighted sum") {
  std::mt19937_64 rng(12);
  for (int k = 0; k < 50; ++k) {
    const ProbabilityMatrix p = testing::random_probs(rng);
    const SubcarrierWeights w = testing::random_weights(rng);
    const UtensilDecision d = soft_decision(p, w);
    const ClassScores ref = testing::brute_fused(p, w);
    CHECK(testing::max_rel_error(d.fused_scores, ref) < 1e-12);
    Eigen::Index best = 0;
    ref.maxCoeff(&best);
    CHECK(static_cast<Eigen::Index>(d.label) == best);
    CHECK(d.total_probability == doctest::Approx(30.0));
  }
}

TEST_CASE("ties go to the earlier class") {
  ProbabilityMatrix p = ProbabilityMatrix::Constant(0.25);
  const SubcarrierWeights w = SubcarrierWeights::Constant(1.0 / 30.0);
  CHECK(soft_decision(p, w).label == Utensil::Fork);
  CHECK(hard_vote(p) == Utensil::Fork);
  p.col(1).setConstant(0.4);
  p.col(2).setConstant(0.4);
  p.col(0).setConstant(0.1);
  p.col(3).setConstant(0.1);
  CHECK(soft_decision(p, w).label == Utensil::KnifeFork);
}

TEST_CASE("soft decision can overrule the majority vote") {
  // 20 quiet subcarriers lean fork, 10 strong ones are sure of spoon
  ProbabilityMatrix p;
  SubcarrierWeights w;
  for (int i = 0; i < 30; ++i) {
    if (i < 20) {
      p.row(i) << 0.4, 0.2, 0.2, 0.2;
      w(i) = 0.01;
    } else {
      p.row(i) << 0.0, 0.0, 1.0, 0.0;
      w(i) = 0.08;
    }
  }
  CHECK(hard_vote(p) == Utensil::Fork);
  CHECK(soft_decision(p, w).label == Utensil::Spoon);
}

TEST_CASE("training on a separable toy set") {
  std::mt19937_64 rng(5);
  const auto train_set = toy_set(rng, 8);
  const UtensilModel m = train(train_set);
  CHECK(m.weights.size() == 1);
  CHECK((m.feature_scale.col(13).array() == 0.0).all());
  int correct = 0;
  const auto test_set = toy_set(rng, 10);
  for (const auto& [f, label] : test_set) {
    const ProbabilityMatrix p = subcarrier_probs(m, f);
    CHECK((p.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK((p.array() >= 0.0).all());
    correct += soft_decision(p, SubcarrierWeights::Constant(1.0 / 30)).label == label;
  }
  CHECK(correct >= 38);

  const UtensilModel again = train(train_set);
  CHECK(nlohmann::json(again).dump() == nlohmann::json(m).dump());
  const UtensilModel back = nlohmann::json(m).get<UtensilModel>();
  CHECK(back.margins(test_set[0].first) == m.margins(test_set[0].first));

  UtensilTrainConfig per;
  per.per_subcarrier = true;
  CHECK(train(train_set, per).weights.size() == 30);
}

TEST_CASE("softmax temperature flattens probabilities") {
  std::mt19937_64 rng(9);
  const auto data = toy_set(rng, 6);
  UtensilTrainConfig hot;
  hot.temperature = 50.0;
  const UtensilModel sharp = train(data);
  const UtensilModel flat = train(data, hot);
  const FeatureMatrix& f = data[0].first;
  CHECK(subcarrier_probs(flat, f).maxCoeff() < subcarrier_probs(sharp, f).maxCoeff());
}

TEST_CASE("training input checks") {
  std::mt19937_64 rng(1);
  auto data = toy_set(rng, 5);
  std::vector<LabeledFeatures> single(data.begin(), data.begin() + 5);
  CHECK_THROWS_AS(train(single), Error);
  data.pop_back();
  data.pop_back();
  try {
    train(data);
    FAIL("expected InsufficientData");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientData);
  }
  UtensilTrainConfig bad;
  bad.lambda = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK_THROWS_AS(UtensilModel{}.margins(FeatureMatrix::Zero()), Error);
}

TEST_CASE("subcarrier weights are variance shares") {
  CsiTrace t;
  t.sample_rate_hz = 100.0;
  t.timestamps = VectorXd::LinSpaced(100, 0.0, 0.99);
  t.amplitudes = MatrixXd::Ones(100, 30);
  const ActivitySegment seg{0, 100, 0.0, 1.0};
  CHECK((subcarrier_weights(t, seg).array() - 1.0 / 30).abs().maxCoeff() < 1e-15);
  for (Eigen::Index i = 0; i < 100; ++i) t.amplitudes(i, 3) += (i % 2 ? 1.0 : -1.0);
  const SubcarrierWeights w = subcarrier_weights(t, seg);
  CHECK(w(3) == doctest::Approx(1.0));
  CHECK(w.sum() == doctest::Approx(1.0));
}

TEST_CASE("fusion properties") {
  std::mt19937_64 rng(31);
  for (int k = 0; k < 20; ++k) {
    const ProbabilityMatrix p = testing::random_probs(rng);
    const SubcarrierWeights w = testing::random_weights(rng);
    const UtensilDecision d = soft_decision(p, w);
    CHECK(d.fused_scores.sum() == doctest::Approx(1.0));
    // consistent permutation of subcarriers
    Eigen::PermutationMatrix<kSubcarriers> perm;
    perm.setIdentity();
    std::shuffle(perm.indices().data(), perm.indices().data() + kSubcarriers, rng);
    const ProbabilityMatrix pp = perm * p;
    const SubcarrierWeights ww = perm * w;
    CHECK(soft_decision(pp, ww).label == d.label);
  }
  ProbabilityMatrix p = ProbabilityMatrix::Constant(0.25);
  p.row(4) << 0.0, 0.0, 1.0, 0.0;
  SubcarrierWeights w = SubcarrierWeights::Zero();
  w(4) = 1.0;
  const UtensilDecision d = soft_decision(p, w);
  CHECK(d.label == Utensil::Spoon);
  CHECK(d.fused_scores(2) == 1.0);
}

TEST_CASE("zero margins give uniform probabilities") {
  std::mt19937_64 rng(8);
  const UtensilModel m = train(toy_set(rng, 5));
  UtensilModel zero = m;
  for (auto& w : zero.weights) w.setZero();
  for (auto& b : zero.biases) b.setZero();
  CHECK((subcarrier_probs(zero, FeatureMatrix::Random()).array() - 0.25).abs().maxCoeff() < 1e-15);
}
