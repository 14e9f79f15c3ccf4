#include "wieat/pipeline.hpp"

#include "wieat/error.hpp"
#include "wieat/features.hpp"
#include "wieat/json_eigen.hpp"
#include "wieat/metrics.hpp"
#include "wieat/parallel.hpp"
#include "wieat/preprocess.hpp"

#include <algorithm>
#include <fstream>
#include <random>

namespace wieat {

namespace {

template <typename Fn>
auto staged(const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(stage);
  }
}

nlohmann::json segment_json(const ActivitySegment& s) {
  return {{"start_idx", s.start_idx}, {"end_idx", s.end_idx}, {"start_s", s.start_s}, {"end_s", s.end_s}};
}

ActivitySegment make_span(Eigen::Index a, Eigen::Index b, double fs) {
  return {a, b, static_cast<double>(a) / fs, static_cast<double>(b) / fs};
}

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  return out;
}

}  // namespace

CsiTrace clean_trace(const CsiTrace& trace, const PreprocessConfig& config, int threads) {
  CsiTrace out = trace;
  if (config.remove_outliers && trace.samples() > 0) {
    const Eigen::Index window = std::min(config.hampel_window, trace.samples() % 2 == 1 ? trace.samples() : trace.samples() - 1);
    out.amplitudes = remove_outliers_columns(trace.amplitudes, window, config.hampel_k, threads);
  }
  return out;
}

std::vector<ActivitySegment> inter_delivery_intervals(const std::vector<SegmentVerdict>& segments, double fs) {
  std::vector<ActivitySegment> out;
  const SegmentVerdict* prev = nullptr;
  for (const auto& s : segments) {
    if (!s.eating) continue;
    if (prev && static_cast<double>(s.segment.start_idx - prev->segment.end_idx) >= kMinApsdIntervalS * fs) {
      out.push_back(make_span(prev->segment.end_idx, s.segment.start_idx, fs));
    }
    prev = &s;
  }
  return out;
}

PipelineResult run_pipeline(const PipelineConfig& config, const CsiTrace& trace, const Models& models, int threads) {
  staged("config", [&] {
    config.validate(trace.sample_rate_hz);
    return 0;
  });
  PipelineResult result;
  result.config = config;
  result.sample_rate_hz = trace.sample_rate_hz;
  result.samples = trace.samples();
  const double fs = trace.sample_rate_hz;

  const CsiTrace cleaned = staged("preprocess", [&] { return clean_trace(trace, config.preprocess, threads); });
  result.mean_amplitude = cleaned.amplitudes.rowwise().mean();
  result.segmentation = staged("segment", [&] { return segment_trace(cleaned, config.segmentation); });

  const auto& segs = result.segmentation.segments;
  result.segments.resize(segs.size());
  staged("detect-eating", [&] {
    for (std::size_t k = 0; k < segs.size(); ++k) {
      auto& v = result.segments[k];
      v.segment = segs[k];
      if (static_cast<double>(segs[k].length()) < kMinFeatureSegmentS * fs) continue;
      const EatingVerdict verdict = is_eating(models.detector, segment_feature_vector(cleaned, segs[k]));
      v.eating = verdict.eating;
      v.distance = verdict.distance;
    }
    return 0;
  });
  staged("classify", [&] {
    for (auto& v : result.segments) {
      if (v.eating) v.utensil = classify(models.utensil, cleaned, v.segment, threads);
    }
    return 0;
  });

  const auto gaps = inter_delivery_intervals(result.segments, fs);
  result.intervals.resize(gaps.size());
  staged("chew-count", [&] {
    parallel_for(gaps.size(), threads, [&](std::size_t k) { result.intervals[k] = analyze_interval(cleaned, gaps[k], config.chew); });
    return 0;
  });
  return result;
}

void to_json(nlohmann::json& j, const ChewSwallowReport& r) {
  j = segment_json(r.interval);
  j["chew_count"] = r.chew_count;
  j["swallow_count"] = r.swallow_count;
  j["chew_rate_hz"] = r.chew_rate_hz ? nlohmann::json(*r.chew_rate_hz) : nlohmann::json(nullptr);
  j["chew_times_s"] = r.chew_times_s;
  j["swallow_times_s"] = r.swallow_times_s;
  j["mean_range"] = r.mean_range;
  j["mean_interval_s"] = r.mean_interval_s;
}

nlohmann::json to_json(const PipelineResult& result) {
  nlohmann::json segments = nlohmann::json::array();
  for (const auto& v : result.segments) {
    nlohmann::json s = segment_json(v.segment);
    s["eating"] = v.eating;
    s["distance"] = v.distance ? nlohmann::json(*v.distance) : nlohmann::json(nullptr);
    if (v.utensil) {
      nlohmann::json u = *v.utensil;
      u.erase("per_subcarrier_probs");
      s["utensil"] = std::move(u);
    } else {
      s["utensil"] = nullptr;
    }
    segments.push_back(std::move(s));
  }
  nlohmann::json intervals = nlohmann::json::array();
  for (const auto& a : result.intervals) {
    nlohmann::json r = a.report;
    r["beta_s"] = a.beta_s;
    r["gamma"] = a.gamma;
    intervals.push_back(std::move(r));
  }
  return {{"kind", "pipeline_result"},
          {"config", result.config},
          {"sample_rate_hz", result.sample_rate_hz},
          {"samples", result.samples},
          {"segmentation_threshold", result.segmentation.threshold},
          {"segments", std::move(segments)},
          {"intervals", std::move(intervals)}};
}

void emit_plot_data(const PipelineResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
  const double fs = result.sample_rate_hz;
  const auto& seg = result.segmentation;

  auto ts = open_csv(dir / "timeseries.csv");
  ts << "time_s,mean_amplitude,activity\n";
  for (Eigen::Index i = 0; i < result.mean_amplitude.size(); ++i) {
    ts << format_double(static_cast<double>(i) / fs) << ',' << format_double(result.mean_amplitude(i)) << ','
       << (i < seg.activity_series.size() ? format_double(seg.activity_series(i)) : "") << '\n';
  }

  auto sp = open_csv(dir / "spectrogram.csv");
  sp << "time_s,freq_hz,power\n";
  for (Eigen::Index t = 0; t < seg.spec.power.rows(); ++t) {
    for (Eigen::Index f = 0; f < seg.spec.power.cols(); ++f) {
      sp << format_double(seg.spec.time_bins_s(t)) << ',' << format_double(seg.spec.freq_bins_hz(f)) << ','
         << format_double(seg.spec.power(t, f)) << '\n';
    }
  }

  auto st = open_csv(dir / "ste.csv");
  st << "time_s,cpsd,ste,threshold\n";
  for (Eigen::Index t = 0; t < seg.ste.size(); ++t) {
    st << format_double(seg.frame_times_s(t)) << ',' << format_double(seg.cpsd(t)) << ',' << format_double(seg.ste(t)) << ','
       << format_double(seg.threshold) << '\n';
  }

  auto sg = open_csv(dir / "segments.csv");
  sg << "segment,start_s,end_s,eating,distance,utensil\n";
  auto us = open_csv(dir / "utensil_scores.csv");
  us << "segment,fork,knife_fork,spoon,hand\n";
  for (std::size_t k = 0; k < result.segments.size(); ++k) {
    const auto& v = result.segments[k];
    sg << k << ',' << format_double(v.segment.start_s) << ',' << format_double(v.segment.end_s) << ',' << (v.eating ? 1 : 0) << ','
       << (v.distance ? format_double(*v.distance) : "") << ',' << (v.utensil ? to_string(v.utensil->label) : "") << '\n';
    if (v.utensil) {
      us << k;
      for (Eigen::Index c = 0; c < kUtensilCount; ++c) us << ',' << format_double(v.utensil->fused_scores(c));
      us << '\n';
    }
  }

  auto ap = open_csv(dir / "apsd.csv");
  ap << "interval,freq_hz,apsd_db\n";
  auto rc = open_csv(dir / "reconstructed.csv");
  rc << "interval,time_s,value,subcarrier\n";
  for (std::size_t k = 0; k < result.intervals.size(); ++k) {
    const auto& a = result.intervals[k];
    for (Eigen::Index f = 0; f < a.spectrum.freqs_hz.size(); ++f) {
      ap << k << ',' << format_double(a.spectrum.freqs_hz(f)) << ',' << format_double(a.spectrum.apsd_db(f)) << '\n';
    }
    for (Eigen::Index i = 0; i < a.series.values.size(); ++i) {
      rc << k << ',' << format_double(a.report.interval.start_s + static_cast<double>(i) / fs) << ',' << format_double(a.series.values(i))
         << ',' << a.series.source_subcarrier[static_cast<std::size_t>(i)] << '\n';
    }
  }
  for (auto* s : {&ts, &sp, &st, &sg, &us, &ap, &rc}) {
    s->flush();
    if (!*s) throw Error(ErrorCode::IoFailure, "failed writing plot data to " + dir.string());
  }
}

void add_training_examples(TrainingData& data, const CsiTrace& trace, const GroundTruth& truth, const PipelineConfig& config,
                           int threads, bool snap_to_detected) {
  const CsiTrace cleaned = clean_trace(trace, config.preprocess, threads);
  const double fs = trace.sample_rate_hz;
  std::vector<ActivitySegment> truth_spans, found;
  for (const auto& t : truth.segments) truth_spans.push_back(t.segment);
  if (snap_to_detected) found = segment_trace(cleaned, config.segmentation).segments;
  std::vector<ActivitySegment> spans = truth_spans;
  for (const auto& [d, t] : match_segments(found, truth_spans, config.match_iou)) spans[t] = found[d];

  for (std::size_t k = 0; k < truth.segments.size(); ++k) {
    const auto& t = truth.segments[k];
    const ActivitySegment& span = spans[k];
    if (static_cast<double>(span.length()) < kMinFeatureSegmentS * fs) continue;
    const FeatureVector v = segment_feature_vector(cleaned, span);
    if (t.kind == EventKind::Delivery) {
      data.eating.push_back(v);
      const auto u = parse_utensil(t.label);
      if (!u) throw Error(ErrorCode::InvalidArgument, "unknown utensil label '" + t.label + "'");
      data.utensil.emplace_back(extract_features(cleaned, span, threads), *u);
    } else if (t.kind == EventKind::NonEating) {
      data.non_eating.push_back(v);
    }
  }
}

TrainingData synthetic_training_data(int per_class, double snr_db, std::uint64_t seed, const PipelineConfig& config, int threads) {
  if (per_class < 1) throw Error(ErrorCode::InsufficientData, "per_class must be positive");
  std::mt19937_64 rng(seed);
  std::vector<SynthScenario> scenarios;
  std::vector<Utensil> order{Utensil::Fork, Utensil::KnifeFork, Utensil::Spoon, Utensil::Hand};
  for (int k = 0; k < per_class; ++k) {
    std::shuffle(order.begin(), order.end(), rng);
    scenarios.push_back(meal_scenario(order, snr_db, rng()));
  }
  for (int k = 0; k < kUtensilCount * per_class; ++k) {
    const auto label = static_cast<NonEatingLabel>(k % static_cast<int>(kNonEatingNames.size()));
    scenarios.push_back(non_eating_scenario(label, snr_db, rng()));
  }
  std::vector<TrainingData> parts(scenarios.size());
  parallel_for(scenarios.size(), threads, [&](std::size_t k) {
    const TraceBundle b = generate(scenarios[k]);
    add_training_examples(parts[k], b.trace, *b.ground_truth, config);
  });
  TrainingData data;
  for (auto& p : parts) {
    data.eating.insert(data.eating.end(), p.eating.begin(), p.eating.end());
    data.non_eating.insert(data.non_eating.end(), p.non_eating.begin(), p.non_eating.end());
    data.utensil.insert(data.utensil.end(), p.utensil.begin(), p.utensil.end());
  }
  return data;
}

Models train_models(const TrainingData& data, const PipelineConfig& config) {
  Models m;
  m.detector = staged("train-detector", [&] { return fit_detector(data.eating, data.non_eating, config.eating); });
  m.utensil = staged("train-utensil", [&] { return train(data.utensil, config.utensil); });
  return m;
}

}  // namespace wieat
