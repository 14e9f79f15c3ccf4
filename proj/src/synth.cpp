#include "wieat/synth.hpp"

#include "wieat/error.hpp"
#include "wieat/json_eigen.hpp"
#include "wieat/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace wieat {

namespace {

constexpr double kChewAmplitude = 0.1;
constexpr double kSwallowAmplitudeRatio = 0.55;
constexpr double kSwallowPeriodRatio = 1.6;
constexpr double kDefaultChewRate = 1.5;
constexpr double kNonEatingDuration = 3.0;
constexpr double kDurationJitter = 0.08;
constexpr double kAmplitudeJitter = 0.10;
constexpr double kNonEatingJitter = 0.15;
constexpr int kBurnIn = 2000;
// Envelope exp(-0.5 (|u| k)^4) falls to 1e-3 at |u| = 1.
const double kEnvelopeScale = std::pow(2.0 * std::log(1000.0), 0.25);

struct NonEatingShape {
  double low_hz, high_hz, amplitude;
};

NonEatingShape non_eating_shape(NonEatingLabel label) {
  switch (label) {
    case NonEatingLabel::Walk: return {1.0, 3.0, 3.0};
    case NonEatingLabel::Sit: return {0.1, 1.2, 2.5};
    case NonEatingLabel::Stand: return {0.1, 1.5, 3.0};
    case NonEatingLabel::Read: return {2.0, 8.0, 0.8};
    case NonEatingLabel::Type: return {3.0, 8.0, 0.6};
  }
  return {1.0, 3.0, 1.0};
}

double param(const ActivityEvent& e, const char* key, double fallback) {
  const auto it = e.params.find(key);
  return it == e.params.end() ? fallback : it->second;
}

// Chew rate and amplitude of the last chew burst starting before event `k`.
std::pair<double, double> preceding_chew(const std::vector<ActivityEvent>& events, std::size_t k) {
  double rate = kDefaultChewRate, amp = kChewAmplitude, best = -1.0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (i == k || e.kind != EventKind::ChewBurst || e.start_s > events[k].start_s || e.start_s < best) continue;
    best = e.start_s;
    rate = e.rate_hz;
    amp = param(e, "amplitude", kChewAmplitude);
  }
  return {rate, amp};
}

// Longest extent the event can take (jitter included).
double nominal_length(const std::vector<ActivityEvent>& events, std::size_t k) {
  const auto& e = events[k];
  switch (e.kind) {
    case EventKind::Delivery:
      return e.params.count("duration_s") ? e.params.at("duration_s") : utensil_shape(e.utensil).duration_s * (1.0 + kDurationJitter);
    case EventKind::ChewBurst: return static_cast<double>(e.count) / e.rate_hz;
    case EventKind::Swallow: return param(e, "period_s", kSwallowPeriodRatio / preceding_chew(events, k).first);
    case EventKind::NonEating: return param(e, "duration_s", kNonEatingDuration);
  }
  return 0.0;
}

template <typename E, std::size_t N>
E parse_enum(const std::array<std::string_view, N>& names, const std::string& text, const char* what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == text) return static_cast<E>(i);
  }
  throw Error(ErrorCode::InvalidScenario, std::string("unknown ") + what + " '" + text + "'");
}

ActivitySegment make_segment(double start_s, double end_s, double fs, Eigen::Index n) {
  ActivitySegment s;
  s.start_s = start_s;
  s.end_s = end_s;
  s.start_idx = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::llround(start_s * fs)), 0, n);
  s.end_idx = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::llround(end_s * fs)), 0, n);
  return s;
}

}  // namespace

SubcarrierGains default_subcarrier_gains() {
  SubcarrierGains g{};
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = 0.35 + 0.65 * std::abs(std::sin(0.53 * static_cast<double>(i) + 0.4));
  return g;
}

VectorXd subcarrier_baseline() {
  VectorXd b(kSubcarriers);
  for (Eigen::Index i = 0; i < kSubcarriers; ++i) b(i) = 20.0 + 5.0 * std::sin(0.7 * static_cast<double>(i));
  return b;
}

double noise_std_for_snr(const SubcarrierGains& gains, double snr_db) {
  double mean_sq = 0.0;
  for (double g : gains) mean_sq += g * g;
  mean_sq /= static_cast<double>(gains.size());
  return kChewAmplitude * std::sqrt(mean_sq / 2.0) / std::sqrt(std::pow(10.0, snr_db / 10.0));
}

UtensilShape utensil_shape(Utensil u) {
  switch (u) {
    case Utensil::Fork: return {2.0, 1.0, 0.0, 0.0, 2.0};
    case Utensil::KnifeFork: return {2.8, 1.0, 0.5, 0.0, 2.0};
    case Utensil::Spoon: return {1.7, 0.9, 0.0, 0.3, 2.0};
    case Utensil::Hand: return {2.4, 1.1, 0.25, -0.4, 3.0};
  }
  return {2.0, 1.0, 0.0, 0.0, 2.0};
}

void SynthScenario::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidScenario, msg); };
  if (!(std::isfinite(duration_s) && duration_s > 0.0)) fail("duration_s must be positive");
  if (!(std::isfinite(sample_rate_hz) && sample_rate_hz > 0.0)) fail("sample_rate_hz must be positive");
  if (!(std::isfinite(noise_std) && noise_std >= 0.0)) fail("noise_std must be non-negative");
  if (!(std::isfinite(outlier_rate_hz) && outlier_rate_hz >= 0.0)) fail("outlier_rate_hz must be non-negative");
  if (std::llround(duration_s * sample_rate_hz) < 2) fail("scenario must span at least two samples");
  for (double g : subcarrier_gains) {
    if (!(g >= 0.0 && g <= 1.0)) fail("subcarrier gains must lie in [0, 1]");
  }
  std::vector<std::pair<double, double>> extents;
  for (std::size_t k = 0; k < activities.size(); ++k) {
    const auto& e = activities[k];
    const std::string where = "activity " + std::to_string(k + 1) + ": ";
    for (const auto& [key, value] : e.params) {
      if (!std::isfinite(value) || value <= 0.0) fail(where + "parameter '" + key + "' must be positive");
    }
    if (e.kind == EventKind::ChewBurst) {
      if (!(e.rate_hz >= 0.8 && e.rate_hz <= 3.0)) fail(where + "chew rate must lie in [0.8, 3.0] Hz");
      if (e.count < 1) fail(where + "chew count must be positive");
    }
    if (e.kind == EventKind::NonEating) {
      const auto shape = non_eating_shape(e.label);
      if (shape.high_hz >= sample_rate_hz / 2.0) fail(where + "sample rate too low for the non-eating noise band");
    }
    const double len = nominal_length(activities, k);
    if (!(e.start_s >= 0.0) || e.start_s + len > duration_s + 1e-9) fail(where + "extends outside [0, duration_s]");
    extents.emplace_back(e.start_s, e.start_s + len);
  }
  std::sort(extents.begin(), extents.end());
  for (std::size_t k = 1; k < extents.size(); ++k) {
    if (extents[k].first < extents[k - 1].second - 1e-9) fail("activities overlap");
  }
}

TraceBundle generate(const SynthScenario& sc) {
  sc.validate();
  const double fs = sc.sample_rate_hz;
  const auto n = static_cast<Eigen::Index>(std::llround(sc.duration_s * fs));
  std::mt19937_64 rng(sc.seed);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  VectorXd s = VectorXd::Zero(n);
  GroundTruth truth;
  std::vector<std::pair<double, double>> deliveries;
  auto samples_in = [&](double a, double b) {
    const auto lo = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::ceil(a * fs - 1e-9)), 0, n);
    const auto hi = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::ceil(b * fs - 1e-9)), 0, n);
    return std::pair{lo, hi};
  };

  for (std::size_t k = 0; k < sc.activities.size(); ++k) {
    const auto& e = sc.activities[k];
    const double st = e.start_s;
    switch (e.kind) {
      case EventKind::Delivery: {
        const UtensilShape shape = utensil_shape(e.utensil);
        const double dj = jitter(rng), aj = jitter(rng);
        const double d = e.params.count("duration_s") ? e.params.at("duration_s") : shape.duration_s * (1.0 + kDurationJitter * dj);
        const double a = e.params.count("amplitude") ? e.params.at("amplitude") : shape.amplitude * (1.0 + kAmplitudeJitter * aj);
        const double f = 1.0 / d;
        const double hl = d / 2.0 * (1.0 - 0.4 * shape.skew);
        const double hr = d / 2.0 * (1.0 + 0.4 * shape.skew);
        const double c = st + hl;
        const auto [lo, hi] = samples_in(st, st + hl + hr);
        for (Eigen::Index i = lo; i < hi; ++i) {
          const double t = static_cast<double>(i) / fs;
          const double u = t < c ? (t - c) / hl : (t - c) / hr;
          const double env = std::exp(-0.5 * std::pow(std::abs(u) * kEnvelopeScale, 4.0));
          const double ph = 2.0 * std::numbers::pi * f * (t - st);
          s(i) += a * env * (std::cos(ph) + shape.lobe * std::cos(shape.harmonic * ph));
        }
        deliveries.emplace_back(st, st + hl + hr);
        truth.segments.push_back({make_segment(st, st + hl + hr, fs, n), EventKind::Delivery, std::string(to_string(e.utensil))});
        break;
      }
      case EventKind::ChewBurst: {
        const double a = param(e, "amplitude", kChewAmplitude);
        const double len = static_cast<double>(e.count) / e.rate_hz;
        const auto [lo, hi] = samples_in(st, st + len);
        for (Eigen::Index i = lo; i < hi; ++i) {
          s(i) += a * std::sin(2.0 * std::numbers::pi * e.rate_hz * (static_cast<double>(i) / fs - st));
        }
        for (int c = 0; c < e.count; ++c) truth.chew_times_s.push_back(st + (c + 0.25) / e.rate_hz);
        break;
      }
      case EventKind::Swallow: {
        const auto [rate, chew_amp] = preceding_chew(sc.activities, k);
        const double period = param(e, "period_s", kSwallowPeriodRatio / rate);
        const double a = param(e, "amplitude", kSwallowAmplitudeRatio * chew_amp);
        const auto [lo, hi] = samples_in(st, st + period);
        for (Eigen::Index i = lo; i < hi; ++i) {
          s(i) += a * std::sin(2.0 * std::numbers::pi * (static_cast<double>(i) / fs - st) / period);
        }
        truth.swallow_times_s.push_back(st + period / 4.0);
        break;
      }
      case EventKind::NonEating: {
        const NonEatingShape shape = non_eating_shape(e.label);
        const double d = param(e, "duration_s", kNonEatingDuration);
        const double a = param(e, "amplitude", shape.amplitude) * (1.0 + kNonEatingJitter * jitter(rng));
        const auto [lo, hi] = samples_in(st, st + d);
        VectorXd w(hi - lo + kBurnIn);
        for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = normal(rng);
        const SosMatrix sos = butterworth_bandpass({shape.low_hz, shape.high_hz, 2, false}, fs);
        VectorXd colored = sosfilt(sos, w).tail(hi - lo);
        const double sd = std::sqrt((colored.array() - colored.mean()).square().mean());
        if (sd > 0.0) colored /= sd;
        for (Eigen::Index i = lo; i < hi; ++i) {
          const double env = std::sin(std::numbers::pi * (static_cast<double>(i) / fs - st) / d);
          s(i) += a * env * colored(i - lo);
        }
        truth.segments.push_back({make_segment(st, st + d, fs, n), EventKind::NonEating, std::string(kNonEatingNames[static_cast<std::size_t>(e.label)])});
        break;
      }
    }
  }

  TraceBundle bundle;
  CsiTrace& trace = bundle.trace;
  trace.sample_rate_hz = fs;
  trace.timestamps.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) trace.timestamps(i) = static_cast<double>(i) / fs;
  const VectorXd base = subcarrier_baseline();
  trace.amplitudes.resize(n, kSubcarriers);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < kSubcarriers; ++j) {
      double v = base(j) + s(i) * sc.subcarrier_gains[static_cast<std::size_t>(j)];
      if (sc.noise_std > 0.0) v += sc.noise_std * normal(rng);
      trace.amplitudes(i, j) = v;
    }
  }
  if (sc.outlier_rate_hz > 0.0) {
    const auto spikes = std::poisson_distribution<long>(sc.outlier_rate_hz * sc.duration_s)(rng);
    std::uniform_int_distribution<Eigen::Index> row(0, n - 1), col(0, kSubcarriers - 1);
    std::bernoulli_distribution sign(0.5);
    for (long k = 0; k < spikes; ++k) {
      const Eigen::Index i = row(rng), j = col(rng);
      trace.amplitudes(i, j) += (sign(rng) ? 10.0 : -10.0) * sc.noise_std;
    }
  }
  trace.amplitudes = trace.amplitudes.cwiseMax(0.0);
  trace.meta["source"] = "synth";
  trace.meta["seed"] = std::to_string(sc.seed);

  std::sort(truth.segments.begin(), truth.segments.end(),
            [](const TruthSegment& a, const TruthSegment& b) { return a.segment.start_s < b.segment.start_s; });
  std::sort(truth.chew_times_s.begin(), truth.chew_times_s.end());
  std::sort(truth.swallow_times_s.begin(), truth.swallow_times_s.end());
  std::vector<std::pair<double, double>> bursts;
  for (const auto& e : sc.activities) {
    if (e.kind == EventKind::ChewBurst) bursts.emplace_back(e.start_s, e.rate_hz);
  }
  std::sort(bursts.begin(), bursts.end());
  for (const auto& [start, rate] : bursts) {
    double lo = 0.0, hi = sc.duration_s;
    for (const auto& [ds, de] : deliveries) {
      if (de <= start) lo = std::max(lo, de);
      if (ds >= start) hi = std::min(hi, ds);
    }
    if (truth.chew_rates.empty() || truth.chew_rates.back().start_s != lo) truth.chew_rates.push_back({lo, hi, rate});
  }
  bundle.ground_truth = std::move(truth);
  return bundle;
}

SynthScenario delivery_scenario(Utensil u, double snr_db, std::uint64_t seed) {
  SynthScenario sc;
  sc.duration_s = 5.0;
  sc.seed = seed;
  sc.noise_std = noise_std_for_snr(sc.subcarrier_gains, snr_db);
  ActivityEvent e;
  e.kind = EventKind::Delivery;
  e.utensil = u;
  e.start_s = 1.0;
  sc.activities.push_back(e);
  return sc;
}

SynthScenario non_eating_scenario(NonEatingLabel label, double snr_db, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SynthScenario sc;
  const double d = std::uniform_real_distribution<double>(2.0, 5.0)(rng);
  sc.duration_s = d + 2.0;
  sc.seed = rng();
  sc.noise_std = noise_std_for_snr(sc.subcarrier_gains, snr_db);
  ActivityEvent e;
  e.kind = EventKind::NonEating;
  e.label = label;
  e.start_s = 1.0;
  e.params["duration_s"] = d;
  sc.activities.push_back(e);
  return sc;
}

namespace {

double add_chewing(SynthScenario& sc, std::mt19937_64& rng, double t, double rate, int bursts) {
  std::uniform_int_distribution<int> count(6, 13);
  for (int b = 0; b < bursts; ++b) {
    ActivityEvent chew;
    chew.kind = EventKind::ChewBurst;
    chew.start_s = t;
    chew.rate_hz = rate;
    chew.count = count(rng);
    sc.activities.push_back(chew);
    t += chew.count / rate;
    ActivityEvent swallow;
    swallow.kind = EventKind::Swallow;
    swallow.start_s = t;
    sc.activities.push_back(swallow);
    t += kSwallowPeriodRatio / rate;
  }
  return t;
}

}  // namespace

SynthScenario chew_scenario(double rate_hz, int bursts, double snr_db, std::uint64_t seed) {
  if (bursts < 1 || bursts > 3) throw Error(ErrorCode::InvalidScenario, "chew scenario takes 1 to 3 bursts");
  std::mt19937_64 rng(seed);
  SynthScenario sc;
  sc.seed = rng();
  sc.noise_std = noise_std_for_snr(sc.subcarrier_gains, snr_db);
  sc.duration_s = add_chewing(sc, rng, 0.5, rate_hz, bursts) + 0.5;
  return sc;
}

SynthScenario meal_scenario(const std::vector<Utensil>& utensils, double snr_db, std::uint64_t seed) {
  if (utensils.empty()) throw Error(ErrorCode::InvalidScenario, "meal needs at least one delivery");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> rate(1.2, 2.5);
  SynthScenario sc;
  sc.seed = rng();
  sc.noise_std = noise_std_for_snr(sc.subcarrier_gains, snr_db);
  double t = 2.0;
  for (std::size_t k = 0; k < utensils.size(); ++k) {
    ActivityEvent e;
    e.kind = EventKind::Delivery;
    e.utensil = utensils[k];
    e.start_s = t;
    sc.activities.push_back(e);
    t += utensil_shape(e.utensil).duration_s * (1.0 + kDurationJitter) + 1.0;
    if (k + 1 < utensils.size()) t = add_chewing(sc, rng, t, rate(rng), 1) + 1.0;
  }
  sc.duration_s = t + 1.0;
  return sc;
}

SynthScenario meal_scenario(int deliveries, std::optional<Utensil> utensil, double snr_db, std::uint64_t seed) {
  if (deliveries < 1) throw Error(ErrorCode::InvalidScenario, "meal needs at least one delivery");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, kUtensilCount - 1);
  std::vector<Utensil> seq;
  for (int k = 0; k < deliveries; ++k) seq.push_back(utensil ? *utensil : static_cast<Utensil>(pick(rng)));
  return meal_scenario(seq, snr_db, rng());
}

void to_json(nlohmann::json& j, const ActivityEvent& e) {
  j = {{"kind", kEventKindNames[static_cast<std::size_t>(e.kind)]}, {"start_s", e.start_s}};
  if (e.kind == EventKind::Delivery) j["utensil"] = to_string(e.utensil);
  if (e.kind == EventKind::NonEating) j["label"] = kNonEatingNames[static_cast<std::size_t>(e.label)];
  if (e.kind == EventKind::ChewBurst) {
    j["rate_hz"] = e.rate_hz;
    j["count"] = e.count;
  }
  if (!e.params.empty()) j["params"] = e.params;
}

void from_json(const nlohmann::json& j, ActivityEvent& e) {
  try {
    e.kind = parse_enum<EventKind>(kEventKindNames, j.at("kind").get<std::string>(), "activity kind");
    e.start_s = j.at("start_s").get<double>();
    if (e.kind == EventKind::Delivery) {
      const auto u = parse_utensil(j.at("utensil").get<std::string>());
      if (!u) throw Error(ErrorCode::InvalidScenario, "unknown utensil '" + j.at("utensil").get<std::string>() + "'");
      e.utensil = *u;
    }
    if (e.kind == EventKind::NonEating) e.label = parse_enum<NonEatingLabel>(kNonEatingNames, j.at("label").get<std::string>(), "non-eating label");
    if (e.kind == EventKind::ChewBurst) {
      e.rate_hz = j.at("rate_hz").get<double>();
      e.count = j.at("count").get<int>();
    }
    if (j.contains("params")) e.params = j.at("params").get<std::map<std::string, double>>();
    for (const char* key : {"amplitude", "duration_s", "period_s"}) {
      if (j.contains(key)) e.params[key] = j.at(key).get<double>();
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::InvalidScenario, std::string("activity: ") + ex.what());
  }
}

void to_json(nlohmann::json& j, const SynthScenario& s) {
  j = {{"duration_s", s.duration_s},
       {"sample_rate_hz", s.sample_rate_hz},
       {"noise_std", s.noise_std},
       {"outlier_rate_hz", s.outlier_rate_hz},
       {"subcarrier_gains", s.subcarrier_gains},
       {"seed", s.seed},
       {"activities", s.activities}};
}

void from_json(const nlohmann::json& j, SynthScenario& s) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidScenario, "scenario must be a JSON object");
  try {
    s.duration_s = j.at("duration_s").get<double>();
    s.sample_rate_hz = j.value("sample_rate_hz", 500.0);
    s.outlier_rate_hz = j.value("outlier_rate_hz", 0.0);
    s.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("subcarrier_gains")) {
      const auto g = j.at("subcarrier_gains").get<std::vector<double>>();
      if (g.size() != kSubcarriers) throw Error(ErrorCode::InvalidScenario, "subcarrier_gains needs 30 entries");
      std::copy(g.begin(), g.end(), s.subcarrier_gains.begin());
    }
    if (j.contains("noise_std") && j.contains("snr_db")) throw Error(ErrorCode::InvalidScenario, "give noise_std or snr_db, not both");
    s.noise_std = j.contains("snr_db") ? noise_std_for_snr(s.subcarrier_gains, j.at("snr_db").get<double>()) : j.value("noise_std", 0.0);
    s.activities = j.value("activities", std::vector<ActivityEvent>{});
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::InvalidScenario, std::string("scenario: ") + ex.what());
  }
}

void to_json(nlohmann::json& j, const GroundTruth& g) {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& s : g.segments) {
    segs.push_back({{"kind", kEventKindNames[static_cast<std::size_t>(s.kind)]},
                    {"label", s.label},
                    {"start_s", s.segment.start_s},
                    {"end_s", s.segment.end_s},
                    {"start_idx", s.segment.start_idx},
                    {"end_idx", s.segment.end_idx}});
  }
  nlohmann::json rates = nlohmann::json::array();
  for (const auto& r : g.chew_rates) rates.push_back({{"start_s", r.start_s}, {"end_s", r.end_s}, {"rate_hz", r.rate_hz}});
  j = {{"kind", "ground_truth"},
       {"segments", std::move(segs)},
       {"chew_times_s", g.chew_times_s},
       {"swallow_times_s", g.swallow_times_s},
       {"chew_rates", std::move(rates)}};
}

void from_json(const nlohmann::json& j, GroundTruth& g) {
  try {
    g.segments.clear();
    for (const auto& s : j.at("segments")) {
      TruthSegment t;
      t.kind = parse_enum<EventKind>(kEventKindNames, s.at("kind").get<std::string>(), "segment kind");
      t.label = s.at("label").get<std::string>();
      t.segment.start_s = s.at("start_s").get<double>();
      t.segment.end_s = s.at("end_s").get<double>();
      t.segment.start_idx = s.at("start_idx").get<Eigen::Index>();
      t.segment.end_idx = s.at("end_idx").get<Eigen::Index>();
      g.segments.push_back(std::move(t));
    }
    g.chew_times_s = j.at("chew_times_s").get<std::vector<double>>();
    g.swallow_times_s = j.at("swallow_times_s").get<std::vector<double>>();
    g.chew_rates.clear();
    for (const auto& r : j.value("chew_rates", nlohmann::json::array())) {
      g.chew_rates.push_back({r.at("start_s").get<double>(), r.at("end_s").get<double>(), r.at("rate_hz").get<double>()});
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::InvalidArgument, std::string("ground truth: ") + ex.what());
  }
}

}  // namespace wieat
