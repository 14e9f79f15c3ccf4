// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "support.hpp"

#include "wieat/chew_swallow.hpp"
#include "wieat/metrics.hpp"
#include "wieat/pipeline.hpp"
#include "wieat/preprocess.hpp"
#include "wieat/segmentation.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#ifndef WIEAT_FIXTURE_DIR
#define WIEAT_FIXTURE_DIR "tests/fixtures/malformed"
#endif

using namespace wieat;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

constexpr double kSnrDb = 10.0;

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1. chew-rate recovery from the accumulated spectrum
Outcome rate_recovery() {
  double worst = 0.0;
  std::string miss;
  for (double rate : {0.8, 1.0, 1.5, 2.0, 2.5, 3.0}) {
    SynthScenario sc;
    sc.duration_s = 20.0;
    ActivityEvent burst;
    burst.kind = EventKind::ChewBurst;
    burst.rate_hz = rate;
    burst.count = static_cast<int>(std::floor(20.0 * rate + 1e-9));
    sc.activities = {burst};
    const CsiTrace t = generate(sc).trace;
    const ChewAnalysis a = analyze_interval(t, {0, t.samples(), 0.0, sc.duration_s});
    if (!a.report.chew_rate_hz) {
      miss += fmt(" %.1f:none", rate);
      worst = INFINITY;
      continue;
    }
    worst = std::max(worst, std::abs(*a.report.chew_rate_hz - rate));
  }
  return {worst <= 0.1, fmt("max |est - true| = %.4f Hz over 6 rates", worst) + miss};
}

// 2. chew and swallow counts over a 200-interval corpus
Outcome count_accuracy() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> rate(1.2, 2.5);
  std::uniform_int_distribution<int> bursts(1, 2);
  double chew = 0.0, swallow = 0.0;
  const int intervals = 200;
  for (int k = 0; k < intervals; ++k) {
    const double r = rate(rng);
    const int b = bursts(rng);
    const TraceBundle bundle = generate(chew_scenario(r, b, kSnrDb, rng()));
    const CsiTrace cleaned = clean_trace(bundle.trace, PreprocessConfig{});
    const ChewAnalysis a = analyze_interval(cleaned, {0, cleaned.samples(), 0.0, cleaned.samples() / cleaned.sample_rate_hz});
    chew += percentage_error(a.report.chew_count, static_cast<double>(bundle.ground_truth->chew_times_s.size()));
    swallow += percentage_error(a.report.swallow_count, static_cast<double>(bundle.ground_truth->swallow_times_s.size()));
  }
  chew /= intervals;
  swallow /= intervals;
  return {chew <= 0.10 && swallow <= 0.16,
          fmt("chew error %.4f (<= 0.10), swallow error %.4f (<= 0.16), %d intervals at %.0f dB", chew, swallow, intervals, kSnrDb)};
}

std::vector<SynthScenario> utensil_meals(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Utensil> order{Utensil::Fork, Utensil::KnifeFork, Utensil::Spoon, Utensil::Hand};
  std::vector<SynthScenario> out;
  for (int k = 0; k < count; ++k) {
    std::shuffle(order.begin(), order.end(), rng);
    out.push_back(meal_scenario(order, kSnrDb, rng()));
  }
  return out;
}

// 3. utensil classification, 40 deliveries per class, 24 train / 16 test
Outcome utensil_accuracy(std::string& confusion_out) {
  const PipelineConfig config;
  const auto meals = utensil_meals(40, 2024);
  TrainingData train_data;
  for (int k = 0; k < 24; ++k) {
    const TraceBundle b = generate(meals[static_cast<std::size_t>(k)]);
    add_training_examples(train_data, b.trace, *b.ground_truth, config);
  }
  const UtensilModel model = train(train_data.utensil, config.utensil);

  ConfusionMatrix confusion = ConfusionMatrix::Zero();
  long total = 0, unmatched = 0;
  for (int k = 24; k < 40; ++k) {
    const TraceBundle b = generate(meals[static_cast<std::size_t>(k)]);
    const CsiTrace cleaned = clean_trace(b.trace, config.preprocess);
    const auto found = segment_trace(cleaned, config.segmentation).segments;
    std::vector<ActivitySegment> truth;
    std::vector<Utensil> labels;
    for (const auto& s : b.ground_truth->segments) {
      truth.push_back(s.segment);
      labels.push_back(*parse_utensil(s.label));
    }
    total += static_cast<long>(truth.size());
    const auto matches = match_segments(found, truth, config.match_iou);
    unmatched += static_cast<long>(truth.size() - matches.size());
    for (const auto& [d, t] : matches) {
      const Utensil predicted = classify(model, cleaned, found[d]).label;
      ++confusion(static_cast<int>(labels[t]), static_cast<int>(predicted));
    }
  }
  const double acc = accuracy(confusion.trace(), total);  // missed deliveries count as errors
  confusion_out = confusion_csv(confusion);
  return {acc >= 0.90, fmt("held-out fused accuracy %.4f (>= 0.90) on %ld deliveries, %ld unsegmented", acc, total, unmatched)};
}

// 4. eating / non-eating on 100 deliveries + 100 non-eating segments
Outcome eating_accuracy() {
  PipelineConfig config;
  const TrainingData train_data = synthetic_training_data(24, kSnrDb, 99, config);
  const EatingDetector detector = fit_detector(train_data.eating, train_data.non_eating, config.eating);

  TrainingData held;
  for (const auto& sc : utensil_meals(25, 31337)) {
    const TraceBundle b = generate(sc);
    add_training_examples(held, b.trace, *b.ground_truth, config);
  }
  std::mt19937_64 rng(4242);
  for (int k = 0; k < 100; ++k) {
    const TraceBundle b = generate(non_eating_scenario(static_cast<NonEatingLabel>(k % 5), kSnrDb, rng()));
    add_training_examples(held, b.trace, *b.ground_truth, config);
  }
  long correct = 0;
  for (const auto& v : held.eating) correct += is_eating(detector, v).eating;
  for (const auto& v : held.non_eating) correct += !is_eating(detector, v).eating;
  const long total = static_cast<long>(held.eating.size() + held.non_eating.size());
  const double acc = accuracy(correct, 200);
  return {total == 200 && acc >= 0.92,
          fmt("held-out accuracy %.4f (>= 0.92) on %zu eating + %zu non-eating segments", acc, held.eating.size(),
              held.non_eating.size())};
}

// 5. delivery boundaries and spurious segments
Outcome segmentation_quality() {
  const PipelineConfig config;
  std::mt19937_64 rng(555);
  double worst = 0.0;
  long deliveries = 0, count_mismatch = 0;
  for (int k = 0; k < 20; ++k) {
    SynthScenario sc = meal_scenario(1 + static_cast<int>(rng() % 5), std::nullopt, kSnrDb, rng());
    sc.outlier_rate_hz = 0.5;
    const TraceBundle b = generate(sc);
    const auto found = segment_trace(clean_trace(b.trace, config.preprocess), config.segmentation).segments;
    const auto& truth = b.ground_truth->segments;
    deliveries += static_cast<long>(truth.size());
    if (found.size() != truth.size()) {
      ++count_mismatch;
      continue;
    }
    for (std::size_t i = 0; i < truth.size(); ++i) {
      worst = std::max({worst, std::abs(found[i].start_s - truth[i].segment.start_s), std::abs(found[i].end_s - truth[i].segment.end_s)});
    }
  }
  long spurious = 0;
  for (int k = 0; k < 20; ++k) {
    SynthScenario sc;
    sc.duration_s = 30.0;
    sc.seed = rng();
    sc.noise_std = noise_std_for_snr(sc.subcarrier_gains, kSnrDb);
    sc.outlier_rate_hz = 0.5;
    spurious += static_cast<long>(segment_trace(clean_trace(generate(sc).trace, config.preprocess), config.segmentation).segments.size());
  }
  SynthScenario silence;
  silence.duration_s = 30.0;
  spurious += static_cast<long>(segment_trace(generate(silence).trace, config.segmentation).segments.size());
  return {count_mismatch == 0 && worst <= 0.5 && spurious == 0,
          fmt("%ld deliveries, worst boundary error %.3f s (<= 0.5), %ld count mismatches, %ld spurious segments on 21 idle traces",
              deliveries, worst, count_mismatch, spurious)};
}

// 6. brute-force oracles
Outcome numerical_oracles() {
  std::mt19937_64 rng(66);
  const int trials = 100;
  double ste = 0, cpsd = 0, mean = 0, var = 0, apsd_err = 0, fused = 0;
  for (int k = 0; k < trials; ++k) {
    const Eigen::Index n = 64 + static_cast<Eigen::Index>(rng() % 200);
    const VectorXd x = testing::random_vector(rng, n, -3.0, 3.0);

    const double rate = 20.0 + static_cast<double>(rng() % 40);
    const Spectrogram s = spectrogram(x, rate, 0.4 + 0.1 * static_cast<double>(rng() % 4), 0.1);
    const VectorXd c = cumulative_psd(s);
    cpsd = std::max(cpsd, testing::max_rel_error(c, testing::brute_cpsd(x, s.window_samples, s.hop_samples)));
    const Eigen::Index w = 1 + static_cast<Eigen::Index>(rng() % std::min<Eigen::Index>(21, c.size()));
    ste = std::max(ste, testing::max_rel_error(short_time_energy(c, w), testing::brute_ste(c, w)));

    const Eigen::Index mw = 2 + static_cast<Eigen::Index>(rng() % 60);
    mean = std::max(mean, testing::max_rel_error(moving_average(x, mw), testing::brute_moving_mean(x, mw)));
    var = std::max(var, testing::max_rel_error(moving_variance(x, mw), testing::brute_moving_variance(x, mw)));

    const Eigen::Index cols = 1 + static_cast<Eigen::Index>(rng() % 6);
    MatrixXd block(100 + static_cast<Eigen::Index>(rng() % 100), cols);
    for (Eigen::Index i = 0; i < block.size(); ++i) block.data()[i] = std::uniform_real_distribution<double>(0, 5)(rng);
    const ApsdSpectrum a = apsd(block, 50.0);
    const VectorXd lin = a.apsd_db.unaryExpr([](double db) { return std::pow(10.0, db / 10.0); });
    apsd_err = std::max(apsd_err, testing::max_rel_error(lin, testing::brute_apsd_power(block)));

    const ProbabilityMatrix p = testing::random_probs(rng);
    const SubcarrierWeights wt = testing::random_weights(rng);
    const UtensilDecision d = soft_decision(p, wt);
    const ClassScores ref = testing::brute_fused(p, wt);
    Eigen::Index best = 0;
    ref.maxCoeff(&best);
    double err = testing::max_rel_error(d.fused_scores, ref);
    if (static_cast<Eigen::Index>(d.label) != best) err = INFINITY;
    fused = std::max(fused, err);
  }
  const double worst = std::max({ste, cpsd, mean, var, apsd_err, fused});
  return {worst <= 1e-9, fmt("max rel err over %d inputs: ste %.1e, cpsd %.1e, mean %.1e, var %.1e, apsd %.1e, fusion %.1e", trials,
                             ste, cpsd, mean, var, apsd_err, fused)};
}

// 7. band-pass contract at fs = 500 Hz
Outcome filter_contract() {
  const double fs = 500.0;
  const FilterSpec spec{0.8, 3.0, 4, true};
  const SosMatrix sos = butterworth_bandpass(spec, fs);
  double design_err = 0.0;
  for (int k = 0; k <= 2000; ++k) {
    const double f = 0.01 + (fs / 2.0 - 0.02) * k / 2000.0;
    const double want = butterworth_bandpass_magnitude(spec, f, fs);
    design_err = std::max(design_err, std::abs(sos_magnitude(sos, f, fs) - want) / std::max(want, 1e-6));
  }
  auto db = [](double mag) { return -20.0 * std::log10(std::max(mag, 1e-300)); };
  const double dc_db = db(sos_magnitude(sos, 0.0, fs));
  const double hi_db = db(sos_magnitude(sos, 10.0, fs));
  const double ripple = std::abs(1.0 - sos_magnitude(sos, 1.5, fs));

  // measured on signals through the zero-phase path
  const Eigen::Index n = 20000;
  auto tone_gain = [&](double f) {
    VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = f == 0.0 ? 1.0 : std::sin(2 * std::numbers::pi * f * i / fs);
    const VectorXd y = bandpass(x, spec, fs);
    const auto mid = y.segment(n / 4, n / 2);
    const auto ref = x.segment(n / 4, n / 2);
    return std::sqrt(mid.squaredNorm() / ref.squaredNorm());
  };
  const double dc_meas = db(tone_gain(0.0));
  const double hi_meas = db(tone_gain(10.0));
  const double pass_meas = std::abs(1.0 - tone_gain(1.5));

  const bool pass = design_err < 1e-6 && dc_db >= 20 && hi_db >= 20 && ripple <= 0.05 && dc_meas >= 20 && hi_meas >= 20 &&
                    pass_meas <= 0.05;
  auto att = [](double v) { return v > 300.0 ? std::string(">300") : fmt("%.1f", v); };
  return {pass, fmt("design vs analytic %.1e; attenuation DC %s dB, 10 Hz %.1f dB; 1.5 Hz deviation %.4f; ", design_err,
                    att(dc_db).c_str(), hi_db, ripple) +
                    fmt("zero-phase measured DC %s dB, 10 Hz %.1f dB, 1.5 Hz deviation %.4f", att(dc_meas).c_str(), hi_meas,
                        pass_meas)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 8. bytewise determinism across runs and thread counts
Outcome determinism() {
  PipelineConfig config;
  const TrainingData d1 = synthetic_training_data(6, kSnrDb, 5, config, 1);
  const TrainingData d4 = synthetic_training_data(6, kSnrDb, 5, config, 4);
  const Models m1 = train_models(d1, config);
  const Models m4 = train_models(d4, config);
  const bool models_equal = nlohmann::json(m1.detector).dump() == nlohmann::json(m4.detector).dump() &&
                            nlohmann::json(m1.utensil).dump() == nlohmann::json(m4.utensil).dump();

  const TraceBundle meal = generate(meal_scenario(4, std::nullopt, kSnrDb, 77));
  const auto tmp = fs::temp_directory_path() / "wieat_acceptance_det";
  std::vector<std::string> outputs;
  for (int threads : {1, 1, 4}) {
    const PipelineResult r = run_pipeline(config, meal.trace, m1, threads);
    const auto dir = tmp / std::to_string(outputs.size());
    fs::remove_all(dir);
    emit_plot_data(r, dir);
    std::string all = to_json(r).dump(2);
    for (const auto& entry : fs::directory_iterator(dir)) all += entry.path().filename().string() + slurp(entry.path());
    outputs.push_back(all);
  }
  fs::remove_all(tmp);
  const bool same = outputs[0] == outputs[1] && outputs[0] == outputs[2];
  return {models_equal && same, fmt("trained models %s across 1/4 threads; pipeline json + plot csv %s across run/run/4 threads (%zu bytes)",
                                    models_equal ? "identical" : "DIFFER", same ? "identical" : "DIFFER", outputs[0].size())};
}

// 9. IO round-trip and malformed inputs
Outcome io_roundtrip() {
  std::mt19937_64 rng(909);
  int csv_ok = 0, bin_ok = 0;
  for (int k = 0; k < 100; ++k) {
    CsiTrace t = testing::random_trace(rng, 1 + static_cast<Eigen::Index>(rng() % 300), k % 3 == 0);
    t.meta["trial"] = std::to_string(k);
    std::stringstream csv, bin;
    write_trace_csv(t, csv);
    csv_ok += read_trace_csv(csv) == t;
    write_trace_binary(t, bin);
    CsiTrace back = read_trace_binary(bin);
    back.meta = t.meta;
    bin_ok += back == t;
  }
  int fixtures = 0, structured = 0;
  std::string bad;
  for (const auto& entry : fs::directory_iterator(WIEAT_FIXTURE_DIR)) {
    ++fixtures;
    try {
      load_trace(entry.path());
      bad += " " + entry.path().filename().string() + ":accepted";
    } catch (const Error&) {
      ++structured;
    } catch (const std::exception& e) {
      bad += " " + entry.path().filename().string() + ":unstructured";
    }
  }
  return {csv_ok == 100 && bin_ok == 100 && fixtures >= 10 && structured == fixtures,
          fmt("csv %d/100, binary %d/100 bitwise; %d/%d malformed fixtures raised structured errors", csv_ok, bin_ok, structured,
              fixtures) + bad};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  std::string confusion;
  const std::vector<Criterion> criteria{
      {1, "chew-rate peak recovery", 5.0, rate_recovery},
      {2, "chew/swallow count error", 30.0, count_accuracy},
      {3, "utensil classification", 60.0, [&] { return utensil_accuracy(confusion); }},
      {4, "eating detection", 30.0, eating_accuracy},
      {5, "segmentation boundaries", 0.0, segmentation_quality},
      {6, "numerical oracles", 0.0, numerical_oracles},
      {7, "filter contract", 0.0, filter_contract},
      {8, "determinism", 0.0, determinism},
      {9, "io round-trip", 0.0, io_roundtrip},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0.0 && secs > c.budget_s) {
      o.pass = false;
      o.detail += fmt(" [over %.0f s budget]", c.budget_s);
    }
    failed += !o.pass;
    std::printf("%s criterion %d  %-26s %6.2f s  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.c_str());
    std::fflush(stdout);
    if (c.id == 3 && !confusion.empty()) {
      std::printf("     utensil confusion (rows truth, cols predicted):\n");
      std::istringstream lines(confusion);
      for (std::string line; std::getline(lines, line);) std::printf("       %s\n", line.c_str());
    }
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
