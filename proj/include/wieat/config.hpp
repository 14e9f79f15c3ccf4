#pragma once

#include "wieat/chew_swallow.hpp"
#include "wieat/eating_detect.hpp"
#include "wieat/segmentation.hpp"
#include "wieat/utensil.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>

namespace wieat {

struct PreprocessConfig {
  bool remove_outliers = true;
  Eigen::Index hampel_window = 11;
  double hampel_k = 3.0;
};

/// Every tunable of the pipeline. Thread count is a runtime option and not part of the config.
struct PipelineConfig {
  PreprocessConfig preprocess;
  SegmentationConfig segmentation;
  EatingDetectorParams eating;
  UtensilTrainConfig utensil;
  ChewConfig chew;
  double match_iou = 0.5;
  std::uint64_t seed = 0;

  /// Copies `seed` into every stochastic component.
  void apply_seed(std::uint64_t value);
  /// Throws InvalidConfig.
  void validate(double sample_rate_hz = 500.0) const;
};

void to_json(nlohmann::json& j, const PipelineConfig& c);
/// Overrides the defaults with whatever keys are present; unknown keys are rejected.
void from_json(const nlohmann::json& j, PipelineConfig& c);

PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace wieat
