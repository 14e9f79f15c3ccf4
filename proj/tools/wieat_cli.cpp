// wieat: command-line front end for the eating-monitoring pipeline.
#include "wieat/chew_swallow.hpp"
#include "wieat/config.hpp"
#include "wieat/csi_io.hpp"
#include "wieat/error.hpp"
#include "wieat/features.hpp"
#include "wieat/metrics.hpp"
#include "wieat/parallel.hpp"
#include "wieat/pipeline.hpp"
#include "wieat/preprocess.hpp"
#include "wieat/segmentation.hpp"
#include "wieat/synth.hpp"
#include "wieat/utensil.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wieat;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string config_path;
};

PipelineConfig effective_config(const Globals& g) {
  PipelineConfig c = g.config_path.empty() ? PipelineConfig{} : load_config(g.config_path);
  if (g.seed) c.apply_seed(*g.seed);
  c.validate();
  return c;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path);
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

double parse_number(const std::string& text, const char* what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::InvalidArgument, std::string("bad ") + what + " '" + text + "'");
  }
  return v;
}

std::pair<double, double> parse_pair(const std::string& text, const char* what) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must look like A:B");
  return {parse_number(text.substr(0, colon), what), parse_number(text.substr(colon + 1), what)};
}

template <typename T>
T load_model(const std::string& path) {
  return read_json(path).get<T>();
}

std::vector<ActivitySegment> read_segments(const std::string& path, double fs, Eigen::Index n) {
  const json j = read_json(path);
  std::vector<ActivitySegment> out;
  try {
    for (const auto& s : j.at("segments")) {
      ActivitySegment seg;
      seg.start_s = s.at("start_s").get<double>();
      seg.end_s = s.at("end_s").get<double>();
      seg.start_idx = s.contains("start_idx") ? s.at("start_idx").get<Eigen::Index>() : static_cast<Eigen::Index>(std::llround(seg.start_s * fs));
      seg.end_idx = s.contains("end_idx") ? s.at("end_idx").get<Eigen::Index>() : static_cast<Eigen::Index>(std::llround(seg.end_s * fs));
      seg.start_idx = std::clamp<Eigen::Index>(seg.start_idx, 0, n);
      seg.end_idx = std::clamp<Eigen::Index>(seg.end_idx, 0, n);
      out.push_back(seg);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, path + ": " + e.what());
  }
  return out;
}

json segment_json(const ActivitySegment& s) {
  return {{"start_idx", s.start_idx}, {"end_idx", s.end_idx}, {"start_s", s.start_s}, {"end_s", s.end_s}};
}

std::string diagnostic(const Error& e) {
  std::string line = "error: " + std::string(to_string(e.code()));
  if (!e.stage().empty()) line += " stage=" + e.stage();
  if (e.row()) line += " row=" + std::to_string(*e.row());
  if (e.column()) line += " column=" + std::to_string(*e.column());
  std::string msg = e.what();
  for (char& c : msg) {
    if (c == '\n') c = ' ';
  }
  return line + ": " + msg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"WiFi-CSI eating monitoring: segmentation, eating detection, utensil classification, chew/swallow counting"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Seed for every stochastic component");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::Range(1, 1024));
  app.add_option("--config", g.config_path, "Pipeline config JSON")->check(CLI::ExistingFile);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic trace and its ground truth");
  std::string scenario_path, synth_out, truth_out;
  int meal = 0;
  double snr_db = 10.0;
  auto* scenario_opt = synth->add_option("--scenario", scenario_path, "Scenario JSON")->check(CLI::ExistingFile);
  auto* meal_opt = synth->add_option("--meal", meal, "Canned meal with this many deliveries instead of a scenario file");
  scenario_opt->excludes(meal_opt);
  synth->add_option("--snr", snr_db, "SNR in dB for --meal")->capture_default_str();
  synth->add_option("--out", synth_out, "Trace path (.csv, or .bin/.wiec for binary)")->required();
  synth->add_option("--truth", truth_out, "Ground-truth JSON (default <out>.truth.json)");

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "Outlier removal and optional band-pass");
  std::string pre_in, pre_out, band_text, hampel_text;
  int order = 4;
  bool no_hampel = false;
  pre->add_option("--in", pre_in, "Input trace")->required()->check(CLI::ExistingFile);
  pre->add_option("--out", pre_out, "Output trace")->required();
  pre->add_option("--band", band_text, "Band-pass edges LO:HI in Hz");
  pre->add_option("--order", order, "Butterworth order")->capture_default_str();
  pre->add_option("--hampel", hampel_text, "Hampel window:k (window odd, samples)");
  pre->add_flag("--no-hampel", no_hampel, "Skip outlier removal");

  // segment
  auto* seg = app.add_subcommand("segment", "Split a trace into activity segments");
  std::string seg_in, seg_out = "-", seg_plots;
  seg->add_option("--in", seg_in, "Input trace")->required()->check(CLI::ExistingFile);
  seg->add_option("--out", seg_out, "Segments JSON")->capture_default_str();
  seg->add_option("--plot-dir", seg_plots, "Directory for ste.csv");

  // detect-eating
  auto* det = app.add_subcommand("detect-eating", "Label segments as eating or not");
  std::string det_in, det_model, det_segments, det_out = "-";
  det->add_option("--in", det_in, "Input trace")->required()->check(CLI::ExistingFile);
  det->add_option("--model", det_model, "detector.json")->required()->check(CLI::ExistingFile);
  det->add_option("--segments", det_segments, "Segments JSON (default: segment the trace)")->check(CLI::ExistingFile);
  det->add_option("--out", det_out, "Verdicts JSON")->capture_default_str();

  // train
  auto* tr = app.add_subcommand("train", "Fit the eating detector and the utensil classifier");
  std::vector<std::string> train_data;
  int per_class = 40;
  std::string detector_out = "detector.json", utensil_out = "utensil_model.json";
  tr->add_option("--data", train_data, "Trace files with <trace>.truth.json sidecars (default: synthetic corpus)")->check(CLI::ExistingFile);
  tr->add_option("--synthetic", per_class, "Synthetic examples per class")->capture_default_str();
  tr->add_option("--snr", snr_db, "Synthetic SNR in dB")->capture_default_str();
  tr->add_option("--detector-out", detector_out, "")->capture_default_str();
  tr->add_option("--utensil-out", utensil_out, "")->capture_default_str();

  // classify
  auto* cls = app.add_subcommand("classify", "Utensil decision per eating segment");
  std::string cls_in, cls_model, cls_segments, cls_truth, cls_out = "-", cls_confusion;
  cls->add_option("--in", cls_in, "Input trace")->required()->check(CLI::ExistingFile);
  cls->add_option("--model", cls_model, "utensil_model.json")->required()->check(CLI::ExistingFile);
  auto* cls_seg_opt = cls->add_option("--segments", cls_segments, "Segments JSON")->check(CLI::ExistingFile);
  auto* cls_truth_opt = cls->add_option("--truth", cls_truth, "Ground truth; its deliveries are classified")->check(CLI::ExistingFile);
  cls_seg_opt->excludes(cls_truth_opt);
  cls->add_option("--out", cls_out, "Decisions JSON")->capture_default_str();
  cls->add_option("--confusion", cls_confusion, "Confusion CSV (needs --truth)")->needs(cls_truth_opt);

  // chew-count
  auto* chew = app.add_subcommand("chew-count", "Chew and swallow counts between deliveries");
  std::string chew_in, chew_detector, chew_out = "-", chew_plots;
  std::vector<std::string> chew_intervals;
  chew->add_option("--in", chew_in, "Input trace")->required()->check(CLI::ExistingFile);
  auto* iv_opt = chew->add_option("--interval", chew_intervals, "START:END seconds (repeatable)");
  auto* chew_det_opt = chew->add_option("--detector", chew_detector, "Find gaps between detected eating segments")->check(CLI::ExistingFile);
  iv_opt->excludes(chew_det_opt);
  chew->add_option("--out", chew_out, "Reports JSON")->capture_default_str();
  chew->add_option("--plot-dir", chew_plots, "Directory for apsd.csv and reconstructed.csv");

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "Full pipeline on one trace");
  std::string pipe_in, pipe_detector, pipe_utensil, pipe_out = "-", pipe_plots;
  pipe->add_option("--in", pipe_in, "Input trace")->required()->check(CLI::ExistingFile);
  pipe->add_option("--detector", pipe_detector, "detector.json")->required()->check(CLI::ExistingFile);
  pipe->add_option("--utensil", pipe_utensil, "utensil_model.json")->required()->check(CLI::ExistingFile);
  pipe->add_option("--out", pipe_out, "Result JSON")->capture_default_str();
  pipe->add_option("--plot-dir", pipe_plots, "Directory for plot CSVs");

  // metrics
  auto* met = app.add_subcommand("metrics", "Score a pipeline result against ground truth");
  std::string met_result, met_truth, met_out = "-", met_confusion;
  met->add_option("--result", met_result, "Pipeline result JSON")->required()->check(CLI::ExistingFile);
  met->add_option("--truth", met_truth, "Ground-truth JSON")->required()->check(CLI::ExistingFile);
  met->add_option("--out", met_out, "Report JSON")->capture_default_str();
  met->add_option("--confusion", met_confusion, "Confusion CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: InvalidArgument: " << e.what() << "\n";
    return 1;
  }

  try {
    const PipelineConfig config = effective_config(g);
    const json config_json = config;

    if (*synth) {
      SynthScenario sc;
      if (!scenario_path.empty()) {
        sc = read_json(scenario_path).get<SynthScenario>();
        if (g.seed) sc.seed = *g.seed;
      } else if (meal > 0) {
        sc = meal_scenario(meal, std::nullopt, snr_db, g.seed.value_or(0));
      } else {
        throw Error(ErrorCode::InvalidArgument, "synth needs --scenario or --meal");
      }
      const TraceBundle b = generate(sc);
      save_trace(b.trace, synth_out);
      json truth = *b.ground_truth;
      truth["scenario"] = sc;
      write_json(truth_out.empty() ? synth_out + ".truth.json" : truth_out, truth);
    } else if (*pre) {
      CsiTrace t = load_trace(pre_in);
      PreprocessConfig pc = config.preprocess;
      if (!hampel_text.empty()) {
        const auto [w, k] = parse_pair(hampel_text, "--hampel");
        if (w != std::floor(w)) throw Error(ErrorCode::InvalidArgument, "Hampel window must be an integer");
        pc.hampel_window = static_cast<Eigen::Index>(w);
        pc.hampel_k = k;
      }
      pc.remove_outliers = pc.remove_outliers && !no_hampel;
      t = clean_trace(t, pc, g.threads);
      if (!band_text.empty()) {
        const auto [lo, hi] = parse_pair(band_text, "--band");
        const FilterSpec spec{lo, hi, order, true};
        const Eigen::RowVectorXd level = t.amplitudes.colwise().mean();
        t.amplitudes = bandpass_columns(t.amplitudes, spec, t.sample_rate_hz, g.threads).rowwise() + level;
        t.meta["bandpass_hz"] = band_text;
      }
      save_trace(t, pre_out);
    } else if (*seg) {
      const CsiTrace t = clean_trace(load_trace(seg_in), config.preprocess, g.threads);
      const SegmentationResult r = segment_trace(t, config.segmentation);
      json out = {{"config", config_json}, {"threshold", r.threshold}, {"segments", json::array()}};
      for (const auto& s : r.segments) out["segments"].push_back(segment_json(s));
      write_json(seg_out, out);
      if (!seg_plots.empty()) {
        PipelineResult pr;
        pr.config = config;
        pr.sample_rate_hz = t.sample_rate_hz;
        pr.samples = t.samples();
        pr.mean_amplitude = t.amplitudes.rowwise().mean();
        pr.segmentation = r;
        emit_plot_data(pr, seg_plots);
      }
    } else if (*det) {
      const CsiTrace t = clean_trace(load_trace(det_in), config.preprocess, g.threads);
      const auto detector = load_model<EatingDetector>(det_model);
      const auto segments = det_segments.empty() ? segment_trace(t, config.segmentation).segments
                                                 : read_segments(det_segments, t.sample_rate_hz, t.samples());
      json out = {{"config", config_json}, {"segments", json::array()}};
      for (const auto& s : segments) {
        json row = segment_json(s);
        if (static_cast<double>(s.length()) < kMinFeatureSegmentS * t.sample_rate_hz) {
          row["eating"] = false;
          row["distance"] = nullptr;
        } else {
          const EatingVerdict v = is_eating(detector, segment_feature_vector(t, s));
          row["eating"] = v.eating;
          row["distance"] = v.distance;
        }
        out["segments"].push_back(std::move(row));
      }
      write_json(det_out, out);
    } else if (*tr) {
      TrainingData data;
      if (train_data.empty()) {
        data = synthetic_training_data(per_class, snr_db, config.seed, config, g.threads);
      } else {
        for (const auto& path : train_data) {
          const GroundTruth truth = read_json(path + ".truth.json").get<GroundTruth>();
          add_training_examples(data, load_trace(path), truth, config, g.threads);
        }
      }
      const Models m = train_models(data, config);
      json dj = m.detector, uj = m.utensil;
      dj["config"] = config_json;
      uj["pipeline_config"] = config_json;
      write_json(detector_out, dj);
      write_json(utensil_out, uj);
    } else if (*cls) {
      const CsiTrace t = clean_trace(load_trace(cls_in), config.preprocess, g.threads);
      const auto model = load_model<UtensilModel>(cls_model);
      std::vector<ActivitySegment> segments;
      std::vector<std::optional<Utensil>> labels;
      if (!cls_truth.empty()) {
        for (const auto& s : read_json(cls_truth).get<GroundTruth>().segments) {
          if (s.kind != EventKind::Delivery) continue;
          segments.push_back(s.segment);
          labels.push_back(parse_utensil(s.label));
        }
      } else {
        segments = cls_segments.empty() ? segment_trace(t, config.segmentation).segments
                                        : read_segments(cls_segments, t.sample_rate_hz, t.samples());
        labels.assign(segments.size(), std::nullopt);
      }
      json out = {{"config", config_json}, {"segments", json::array()}};
      ConfusionMatrix confusion = ConfusionMatrix::Zero();
      for (std::size_t k = 0; k < segments.size(); ++k) {
        const UtensilDecision d = classify(model, t, segments[k], g.threads);
        json row = segment_json(segments[k]);
        row["utensil"] = d;
        if (labels[k]) {
          row["truth"] = to_string(*labels[k]);
          ++confusion(static_cast<int>(*labels[k]), static_cast<int>(d.label));
        }
        out["segments"].push_back(std::move(row));
      }
      if (!cls_truth.empty() && confusion.sum() > 0) out["accuracy"] = confusion_accuracy(confusion);
      write_json(cls_out, out);
      if (!cls_confusion.empty()) write_text(cls_confusion, confusion_csv(confusion));
    } else if (*chew) {
      const CsiTrace t = clean_trace(load_trace(chew_in), config.preprocess, g.threads);
      const double fs = t.sample_rate_hz;
      std::vector<ActivitySegment> intervals;
      if (!chew_intervals.empty()) {
        for (const auto& text : chew_intervals) {
          const auto [a, b] = parse_pair(text, "--interval");
          const auto ia = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::llround(a * fs)), 0, t.samples());
          const auto ib = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::llround(b * fs)), 0, t.samples());
          intervals.push_back({ia, ib, static_cast<double>(ia) / fs, static_cast<double>(ib) / fs});
        }
      } else if (!chew_detector.empty()) {
        const auto detector = load_model<EatingDetector>(chew_detector);
        std::vector<SegmentVerdict> verdicts;
        for (const auto& s : segment_trace(t, config.segmentation).segments) {
          SegmentVerdict v;
          v.segment = s;
          if (static_cast<double>(s.length()) >= kMinFeatureSegmentS * fs) v.eating = is_eating(detector, segment_feature_vector(t, s)).eating;
          verdicts.push_back(v);
        }
        intervals = inter_delivery_intervals(verdicts, fs);
      } else {
        intervals.push_back({0, t.samples(), 0.0, static_cast<double>(t.samples()) / fs});
      }
      PipelineResult pr;
      pr.config = config;
      pr.sample_rate_hz = fs;
      pr.samples = t.samples();
      pr.intervals.resize(intervals.size());
      parallel_for(intervals.size(), g.threads, [&](std::size_t k) { pr.intervals[k] = analyze_interval(t, intervals[k], config.chew); });
      json out = {{"config", config_json}, {"intervals", json::array()}};
      for (const auto& a : pr.intervals) {
        json r = a.report;
        r["beta_s"] = a.beta_s;
        r["gamma"] = a.gamma;
        out["intervals"].push_back(std::move(r));
      }
      write_json(chew_out, out);
      if (!chew_plots.empty()) emit_plot_data(pr, chew_plots);
    } else if (*pipe) {
      const CsiTrace t = load_trace(pipe_in);
      const Models m{load_model<EatingDetector>(pipe_detector), load_model<UtensilModel>(pipe_utensil)};
      const PipelineResult r = run_pipeline(config, t, m, g.threads);
      write_json(pipe_out, to_json(r));
      if (!pipe_plots.empty()) emit_plot_data(r, pipe_plots);
    } else if (*met) {
      const EvalReport report = evaluate(read_json(met_result), read_json(met_truth), config.match_iou);
      json out = report;
      out["config"] = config_json;
      write_json(met_out, out);
      if (!met_confusion.empty()) write_text(met_confusion, confusion_csv(report.confusion));
    }
  } catch (const Error& e) {
    std::cerr << diagnostic(e) << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
