#pragma once

#include "wieat/chew_swallow.hpp"
#include "wieat/config.hpp"
#include "wieat/csi_io.hpp"
#include "wieat/eating_detect.hpp"
#include "wieat/segmentation.hpp"
#include "wieat/synth.hpp"
#include "wieat/utensil.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <vector>

namespace wieat {

struct Models {
  EatingDetector detector;
  UtensilModel utensil;
};

/// Outlier removal per subcarrier (no-op when disabled).
CsiTrace clean_trace(const CsiTrace& trace, const PreprocessConfig& config, int threads = 1);

struct SegmentVerdict {
  ActivitySegment segment;
  bool eating = false;
  std::optional<double> distance;  // absent for segments too short to describe
  std::optional<UtensilDecision> utensil;
};

struct PipelineResult {
  PipelineConfig config;
  double sample_rate_hz = 0.0;
  Eigen::Index samples = 0;
  VectorXd mean_amplitude;
  SegmentationResult segmentation;
  std::vector<SegmentVerdict> segments;
  std::vector<ChewAnalysis> intervals;
};

/// Gaps between consecutive eating segments long enough for chew analysis.
std::vector<ActivitySegment> inter_delivery_intervals(const std::vector<SegmentVerdict>& segments, double sample_rate_hz);

/// clean -> segment -> eating test -> utensil decision -> chew/swallow per inter-delivery gap.
/// Output is independent of `threads`.
PipelineResult run_pipeline(const PipelineConfig& config, const CsiTrace& trace, const Models& models, int threads = 1);

nlohmann::json to_json(const PipelineResult& result);

/// Writes timeseries, spectrogram, ste, segments, utensil_scores, apsd and reconstructed CSVs into `dir`.
void emit_plot_data(const PipelineResult& result, const std::filesystem::path& dir);

struct TrainingData {
  std::vector<FeatureVector> eating;
  std::vector<FeatureVector> non_eating;
  std::vector<LabeledFeatures> utensil;
};

/// Adds one example per ground-truth segment of at least 0.5 s. With snap_to_detected, a truth segment
/// matched by the segmenter (IoU >= config.match_iou) is described over the detected span instead, so
/// training sees the same boundaries as inference.
void add_training_examples(TrainingData& data, const CsiTrace& trace, const GroundTruth& truth, const PipelineConfig& config,
                           int threads = 1, bool snap_to_detected = true);

/// `per_class` meals holding one delivery of each utensil in shuffled order, plus 4 * per_class
/// non-eating segments spread over the five labels.
TrainingData synthetic_training_data(int per_class, double snr_db, std::uint64_t seed, const PipelineConfig& config,
                                     int threads = 1);

Models train_models(const TrainingData& data, const PipelineConfig& config);

void to_json(nlohmann::json& j, const ChewSwallowReport& r);

}  // namespace wieat
