#include "wieat/config.hpp"

#include "wieat/error.hpp"
#include "wieat/json_eigen.hpp"

#include <fstream>
#include <initializer_list>
#include <string>

namespace wieat {

using json_eigen::optional_field;

namespace {

void allow_only(const nlohmann::json& j, const char* section, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, std::string(section) + " must be an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : keys) known = known || item.key() == k;
    if (!known) throw Error(ErrorCode::InvalidConfig, std::string("unknown key '") + item.key() + "' in " + section);
  }
}

void check(bool ok, const char* message) {
  if (!ok) throw Error(ErrorCode::InvalidConfig, message);
}

}  // namespace

void PipelineConfig::apply_seed(std::uint64_t value) {
  seed = value;
  eating.seed = value;
  utensil.seed = value;
}

void PipelineConfig::validate(double sample_rate_hz) const {
  check(preprocess.hampel_window >= 1 && preprocess.hampel_window % 2 == 1, "hampel_window must be odd and positive");
  check(preprocess.hampel_k > 0.0, "hampel_k must be positive");
  const auto& s = segmentation;
  check(s.variance_window_s > 0.0 && s.window_s > 0.0 && s.hop_s > 0.0, "segmentation windows must be positive");
  check(s.ste_window >= 1, "ste_window must be >= 1");
  check(s.params.eps_rel > 0.0 && s.params.eps_rel < 1.0, "eps_rel must lie in (0, 1)");
  check(s.params.min_gap_s >= 0.0 && s.params.min_len_s >= 0.0, "min_gap_s and min_len_s must be non-negative");
  check(s.params.floor_factor >= 0.0, "floor_factor must be non-negative");
  check(s.params.floor_quantile >= 0.0 && s.params.floor_quantile <= 1.0, "floor_quantile must lie in [0, 1]");
  check(match_iou > 0.0 && match_iou <= 1.0, "match_iou must lie in (0, 1]");
  try {
    eating.validate();
    utensil.validate();
    chew.validate(sample_rate_hz);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
}

void to_json(nlohmann::json& j, const PipelineConfig& c) {
  const auto& s = c.segmentation;
  const auto& ch = c.chew;
  j = {{"seed", c.seed},
       {"match_iou", c.match_iou},
       {"preprocess",
        {{"remove_outliers", c.preprocess.remove_outliers},
         {"hampel_window", c.preprocess.hampel_window},
         {"hampel_k", c.preprocess.hampel_k}}},
       {"segmentation",
        {{"variance_window_s", s.variance_window_s},
         {"use_moving_std", s.use_moving_std},
         {"window_s", s.window_s},
         {"hop_s", s.hop_s},
         {"ste_window", s.ste_window},
         {"eps_rel", s.params.eps_rel},
         {"min_gap_s", s.params.min_gap_s},
         {"min_len_s", s.params.min_len_s},
         {"floor_factor", s.params.floor_factor},
         {"floor_quantile", s.params.floor_quantile}}},
       {"eating", c.eating},
       {"utensil", c.utensil},
       {"chew",
        {{"band_low_hz", ch.band.low_hz},
         {"band_high_hz", ch.band.high_hz},
         {"order", ch.band.order},
         {"zero_phase", ch.band.zero_phase},
         {"smooth_s", ch.smooth_s},
         {"window_s", ch.reconstruct.window_s},
         {"candidates", ch.reconstruct.candidates},
         {"rate_low_hz", ch.rate.low_hz},
         {"rate_high_hz", ch.rate.high_hz},
         {"prominence_db", ch.rate.prominence_db},
         {"beta_factor", ch.beta_factor},
         {"beta_fallback_s", ch.beta_fallback_s},
         {"gamma_factor", ch.gamma_factor},
         {"gamma_quantile", ch.gamma_quantile}}}};
}

void from_json(const nlohmann::json& j, PipelineConfig& c) {
  allow_only(j, "config", {"seed", "match_iou", "preprocess", "segmentation", "eating", "utensil", "chew"});
  optional_field(j, "match_iou", c.match_iou);
  if (j.contains("preprocess")) {
    const auto& p = j.at("preprocess");
    allow_only(p, "preprocess", {"remove_outliers", "hampel_window", "hampel_k"});
    optional_field(p, "remove_outliers", c.preprocess.remove_outliers);
    optional_field(p, "hampel_window", c.preprocess.hampel_window);
    optional_field(p, "hampel_k", c.preprocess.hampel_k);
  }
  if (j.contains("segmentation")) {
    const auto& p = j.at("segmentation");
    auto& s = c.segmentation;
    allow_only(p, "segmentation", {"variance_window_s", "use_moving_std", "window_s", "hop_s", "ste_window", "eps_rel",
                                   "min_gap_s", "min_len_s", "floor_factor", "floor_quantile"});
    optional_field(p, "variance_window_s", s.variance_window_s);
    optional_field(p, "use_moving_std", s.use_moving_std);
    optional_field(p, "window_s", s.window_s);
    optional_field(p, "hop_s", s.hop_s);
    optional_field(p, "ste_window", s.ste_window);
    optional_field(p, "eps_rel", s.params.eps_rel);
    optional_field(p, "min_gap_s", s.params.min_gap_s);
    optional_field(p, "min_len_s", s.params.min_len_s);
    optional_field(p, "floor_factor", s.params.floor_factor);
    optional_field(p, "floor_quantile", s.params.floor_quantile);
  }
  if (j.contains("eating")) {
    allow_only(j.at("eating"), "eating", {"threshold_scale", "threshold_quantile", "max_iterations", "tolerance", "seed"});
    from_json(j.at("eating"), c.eating);
  }
  if (j.contains("utensil")) {
    allow_only(j.at("utensil"), "utensil", {"epochs", "lambda", "seed", "temperature", "per_subcarrier"});
    from_json(j.at("utensil"), c.utensil);
  }
  if (j.contains("chew")) {
    const auto& p = j.at("chew");
    auto& ch = c.chew;
    allow_only(p, "chew", {"band_low_hz", "band_high_hz", "order", "zero_phase", "smooth_s", "window_s", "candidates",
                           "rate_low_hz", "rate_high_hz", "prominence_db", "beta_factor", "beta_fallback_s",
                           "gamma_factor", "gamma_quantile"});
    optional_field(p, "band_low_hz", ch.band.low_hz);
    optional_field(p, "band_high_hz", ch.band.high_hz);
    optional_field(p, "order", ch.band.order);
    optional_field(p, "zero_phase", ch.band.zero_phase);
    optional_field(p, "smooth_s", ch.smooth_s);
    optional_field(p, "window_s", ch.reconstruct.window_s);
    optional_field(p, "candidates", ch.reconstruct.candidates);
    optional_field(p, "rate_low_hz", ch.rate.low_hz);
    optional_field(p, "rate_high_hz", ch.rate.high_hz);
    optional_field(p, "prominence_db", ch.rate.prominence_db);
    optional_field(p, "beta_factor", ch.beta_factor);
    optional_field(p, "beta_fallback_s", ch.beta_fallback_s);
    optional_field(p, "gamma_factor", ch.gamma_factor);
    optional_field(p, "gamma_quantile", ch.gamma_quantile);
  }
  // A top-level seed wins over the per-component ones.
  if (j.contains("seed")) {
    std::uint64_t seed = 0;
    optional_field(j, "seed", seed);
    c.apply_seed(seed);
  }
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config parse error: ") + e.what());
  }
  PipelineConfig c;
  from_json(j, c);
  c.validate();
  return c;
}

}  // namespace wieat
