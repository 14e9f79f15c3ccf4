#include "wieat/utensil.hpp"

#include "wieat/error.hpp"
#include "wieat/json_eigen.hpp"

#include <array>
#include <cmath>

namespace wieat {

using json_eigen::matrix_from_json;
using json_eigen::matrix_to_json;
using json_eigen::optional_field;
using json_eigen::vector_from_json;
using json_eigen::vector_to_json;

namespace {

using Row = Eigen::Matrix<double, 1, kFeatureCount + 1>;

Eigen::Matrix<double, 1, kFeatureCount> standardize_row(const UtensilModel& m, const FeatureMatrix& f, Eigen::Index i) {
  Eigen::Matrix<double, 1, kFeatureCount> z;
  for (Eigen::Index k = 0; k < kFeatureCount; ++k) {
    z(k) = m.feature_scale(i, k) > 0.0 ? (f(i, k) - m.feature_mean(i, k)) / m.feature_scale(i, k) : 0.0;
  }
  return z;
}

// One-vs-rest hinge classifier on rows augmented with a trailing 1 for the bias.
Eigen::Matrix<double, kUtensilCount, kFeatureCount + 1> fit_one_vs_rest(const MatrixXd& rows, const std::vector<int>& labels,
                                                                       const UtensilTrainConfig& config) {
  Eigen::Matrix<double, kUtensilCount, kFeatureCount + 1> w = decltype(w)::Zero();
  const auto m = static_cast<double>(rows.rows());
  const double radius = 1.0 / std::sqrt(config.lambda);
  VectorXd y(rows.rows());
  for (int c = 0; c < kUtensilCount; ++c) {
    for (Eigen::Index r = 0; r < rows.rows(); ++r) y(r) = labels[static_cast<std::size_t>(r)] == c ? 1.0 : -1.0;
    Row wc = Row::Zero();
    for (int t = 1; t <= config.epochs; ++t) {
      const VectorXd margin = y.cwiseProduct(rows * wc.transpose());
      Row grad = config.lambda * wc;
      Row hinge = Row::Zero();
      for (Eigen::Index r = 0; r < rows.rows(); ++r) {
        if (margin(r) < 1.0) hinge += y(r) * rows.row(r);
      }
      grad -= hinge / m;
      wc -= grad / (config.lambda * static_cast<double>(t));
      const double norm = wc.norm();
      if (norm > radius) wc *= radius / norm;
    }
    w.row(c) = wc;
  }
  return w;
}

}  // namespace

void UtensilTrainConfig::validate() const {
  if (epochs < 1) throw Error(ErrorCode::InvalidConfig, "epochs must be >= 1");
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidConfig, "lambda must be positive");
  if (!(temperature > 0.0)) throw Error(ErrorCode::InvalidConfig, "temperature must be positive");
}

ProbabilityMatrix UtensilModel::margins(const FeatureMatrix& features) const {
  if (weights.empty() || weights.size() != biases.size()) throw Error(ErrorCode::InvalidModel, "utensil model is not trained");
  const bool shared = weights.size() == 1;
  ProbabilityMatrix out;
  for (Eigen::Index i = 0; i < kSubcarriers; ++i) {
    const auto k = shared ? std::size_t{0} : static_cast<std::size_t>(i);
    out.row(i) = (weights[k] * standardize_row(*this, features, i).transpose() + biases[k]).transpose();
  }
  return out;
}

UtensilModel train(const std::vector<LabeledFeatures>& dataset, const UtensilTrainConfig& config) {
  config.validate();
  std::array<int, kUtensilCount> per_class{};
  for (const auto& [f, label] : dataset) {
    if (!f.allFinite()) throw Error(ErrorCode::InsufficientData, "non-finite feature value in training data");
    ++per_class[static_cast<std::size_t>(label)];
  }
  int present = 0;
  for (int c : per_class) {
    if (c == 0) continue;
    ++present;
    if (c < 4) throw Error(ErrorCode::InsufficientData, "each present class needs at least 4 examples");
  }
  if (present == 0) throw Error(ErrorCode::InsufficientData, "empty training set");
  if (present < 2) throw Error(ErrorCode::SingleClass, "training set holds a single class");

  UtensilModel model;
  model.config = config;
  const auto n = static_cast<double>(dataset.size());
  for (const auto& ex : dataset) model.feature_mean += ex.first;
  model.feature_mean /= n;
  FeatureMatrix var = FeatureMatrix::Zero();
  for (const auto& ex : dataset) var += (ex.first - model.feature_mean).cwiseAbs2();
  var /= n;
  for (Eigen::Index i = 0; i < kSubcarriers; ++i) {
    for (Eigen::Index k = 0; k < kFeatureCount; ++k) {
      const double sd = std::sqrt(var(i, k));
      model.feature_scale(i, k) = sd > 1e-12 * std::max(1.0, std::abs(model.feature_mean(i, k))) ? sd : 0.0;
    }
  }

  auto fill = [&](MatrixXd& rows, std::vector<int>& labels, Eigen::Index only) {
    const Eigen::Index per = only < 0 ? kSubcarriers : 1;
    rows.resize(static_cast<Eigen::Index>(dataset.size()) * per, kFeatureCount + 1);
    labels.clear();
    Eigen::Index r = 0;
    for (const auto& [f, label] : dataset) {
      for (Eigen::Index i = 0; i < kSubcarriers; ++i) {
        if (only >= 0 && i != only) continue;
        rows.block(r, 0, 1, kFeatureCount) = standardize_row(model, f, i);
        rows(r, kFeatureCount) = 1.0;
        labels.push_back(static_cast<int>(label));
        ++r;
      }
    }
  };

  MatrixXd rows;
  std::vector<int> labels;
  const Eigen::Index models = config.per_subcarrier ? kSubcarriers : 1;
  for (Eigen::Index s = 0; s < models; ++s) {
    fill(rows, labels, config.per_subcarrier ? s : -1);
    const auto w = fit_one_vs_rest(rows, labels, config);
    model.weights.push_back(w.leftCols(kFeatureCount));
    model.biases.push_back(w.col(kFeatureCount));
  }
  return model;
}

ProbabilityMatrix subcarrier_probs(const UtensilModel& model, const FeatureMatrix& features) {
  ProbabilityMatrix z = model.margins(features) / model.config.temperature;
  for (Eigen::Index i = 0; i < kSubcarriers; ++i) {
    const double top = z.row(i).maxCoeff();
    z.row(i) = (z.row(i).array() - top).exp();
    z.row(i) /= z.row(i).sum();
  }
  return z;
}

SubcarrierWeights subcarrier_weights(const CsiTrace& trace, const ActivitySegment& seg) {
  if (seg.start_idx < 0 || seg.end_idx > trace.samples() || seg.end_idx <= seg.start_idx) {
    throw Error(ErrorCode::InvalidArgument, "segment outside trace bounds");
  }
  const auto block = trace.amplitudes.middleRows(seg.start_idx, seg.length());
  SubcarrierWeights w;
  for (Eigen::Index i = 0; i < kSubcarriers; ++i) {
    const double mean = block.col(i).mean();
    w(i) = (block.col(i).array() - mean).square().sum() / static_cast<double>(seg.length());
  }
  const double total = w.sum();
  if (!(total > 0.0)) return SubcarrierWeights::Constant(1.0 / static_cast<double>(kSubcarriers));
  return w / total;
}

UtensilDecision soft_decision(const ProbabilityMatrix& probs, const SubcarrierWeights& weights) {
  UtensilDecision d;
  d.per_subcarrier_probs = probs;
  for (Eigen::Index i = 0; i < kSubcarriers; ++i) {
    for (Eigen::Index c = 0; c < kUtensilCount; ++c) d.fused_scores(c) += probs(i, c) * weights(i);
  }
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < kUtensilCount; ++c) {
    if (d.fused_scores(c) > d.fused_scores(best)) best = c;
  }
  d.label = static_cast<Utensil>(best);
  d.total_probability = probs.sum();
  return d;
}

Utensil hard_vote(const ProbabilityMatrix& probs) {
  std::array<int, kUtensilCount> votes{};
  for (Eigen::Index i = 0; i < kSubcarriers; ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < kUtensilCount; ++c) {
      if (probs(i, c) > probs(i, best)) best = c;
    }
    ++votes[static_cast<std::size_t>(best)];
  }
  std::size_t winner = 0;
  for (std::size_t c = 1; c < votes.size(); ++c) {
    if (votes[c] > votes[winner]) winner = c;
  }
  return static_cast<Utensil>(winner);
}

UtensilDecision classify(const UtensilModel& model, const CsiTrace& trace, const ActivitySegment& seg, int threads) {
  return soft_decision(subcarrier_probs(model, extract_features(trace, seg, threads)), subcarrier_weights(trace, seg));
}

void to_json(nlohmann::json& j, const UtensilTrainConfig& c) {
  j = {{"epochs", c.epochs},
       {"lambda", c.lambda},
       {"seed", c.seed},
       {"temperature", c.temperature},
       {"per_subcarrier", c.per_subcarrier}};
}

void from_json(const nlohmann::json& j, UtensilTrainConfig& c) {
  optional_field(j, "epochs", c.epochs);
  optional_field(j, "lambda", c.lambda);
  optional_field(j, "seed", c.seed);
  optional_field(j, "temperature", c.temperature);
  optional_field(j, "per_subcarrier", c.per_subcarrier);
}

void to_json(nlohmann::json& j, const UtensilModel& m) {
  nlohmann::json weights = nlohmann::json::array();
  nlohmann::json biases = nlohmann::json::array();
  for (std::size_t k = 0; k < m.weights.size(); ++k) {
    weights.push_back(matrix_to_json(m.weights[k]));
    biases.push_back(vector_to_json(m.biases[k]));
  }
  j = {{"kind", "utensil_model"},
       {"classes", kUtensilNames},
       {"feature_names", kFeatureNames},
       {"feature_mean", matrix_to_json(m.feature_mean)},
       {"feature_scale", matrix_to_json(m.feature_scale)},
       {"weights", std::move(weights)},
       {"biases", std::move(biases)},
       {"config", m.config}};
}

void from_json(const nlohmann::json& j, UtensilModel& m) {
  if (!j.is_object() || j.value("kind", "") != "utensil_model") throw Error(ErrorCode::InvalidModel, "not a utensil model document");
  try {
    matrix_from_json(j.at("feature_mean"), m.feature_mean, "feature_mean");
    matrix_from_json(j.at("feature_scale"), m.feature_scale, "feature_scale");
    if (j.contains("config")) m.config = j.at("config").get<UtensilTrainConfig>();
    const auto& w = j.at("weights");
    const auto& b = j.at("biases");
    if (!w.is_array() || !b.is_array() || w.size() != b.size() || (w.size() != 1 && w.size() != kSubcarriers)) {
      throw Error(ErrorCode::InvalidModel, "utensil model needs 1 or 30 weight blocks with matching biases");
    }
    m.weights.assign(w.size(), ClassWeights::Zero());
    m.biases.assign(b.size(), ClassScores::Zero());
    for (std::size_t k = 0; k < w.size(); ++k) {
      matrix_from_json(w[k], m.weights[k], "weights");
      vector_from_json(b[k], m.biases[k], "biases");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidModel, std::string("utensil model: ") + e.what());
  }
  if ((m.feature_scale.array() < 0.0).any()) throw Error(ErrorCode::InvalidModel, "negative feature scale");
  m.config.validate();
}

void to_json(nlohmann::json& j, const UtensilDecision& d) {
  j = {{"label", to_string(d.label)},
       {"fused_scores", vector_to_json(d.fused_scores)},
       {"total_probability", d.total_probability},
       {"per_subcarrier_probs", matrix_to_json(d.per_subcarrier_probs)}};
}

}  // namespace wieat
