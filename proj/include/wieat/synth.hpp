#pragma once

#include "wieat/csi_io.hpp"
#include "wieat/types.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wieat {

enum class EventKind : int { Delivery, ChewBurst, Swallow, NonEating };
enum class NonEatingLabel : int { Walk, Sit, Stand, Read, Type };

inline constexpr std::array<std::string_view, 4> kEventKindNames{"delivery", "chew_burst", "swallow", "non_eating"};
inline constexpr std::array<std::string_view, 5> kNonEatingNames{"walk", "sit", "stand", "read", "type"};

using SubcarrierGains = std::array<double, kSubcarriers>;

/// Shape overrides in `params`:
///   delivery   amplitude, duration_s
///   chew_burst amplitude
///   swallow    amplitude, period_s (defaults: 0.55x and 1.6/rate of the preceding chew burst)
///   non_eating amplitude, duration_s (default 3 s)
struct ActivityEvent {
  EventKind kind = EventKind::Delivery;
  double start_s = 0.0;
  Utensil utensil = Utensil::Fork;
  NonEatingLabel label = NonEatingLabel::Walk;
  double rate_hz = 0.0;
  int count = 0;
  std::map<std::string, double> params;
};

SubcarrierGains default_subcarrier_gains();

/// Per-subcarrier static amplitude level.
VectorXd subcarrier_baseline();

/// White-noise sigma giving `snr_db` relative to a chew burst of the default amplitude.
double noise_std_for_snr(const SubcarrierGains& gains, double snr_db);

struct SynthScenario {
  double duration_s = 10.0;
  double sample_rate_hz = 500.0;
  std::vector<ActivityEvent> activities;
  double noise_std = 0.0;
  double outlier_rate_hz = 0.0;
  SubcarrierGains subcarrier_gains = default_subcarrier_gains();
  std::uint64_t seed = 0;

  /// Throws InvalidScenario.
  void validate() const;
};

/// Nominal delivery burst shape per utensil.
struct UtensilShape {
  double duration_s;
  double amplitude;
  double lobe;      // weight of the harmonic component
  double skew;      // envelope asymmetry in (-1, 1)
  double harmonic;  // harmonic multiple of the base frequency
};

UtensilShape utensil_shape(Utensil u);

struct TruthSegment {
  ActivitySegment segment;
  EventKind kind = EventKind::Delivery;
  std::string label;
};

struct ChewRateTruth {
  double start_s = 0.0;
  double end_s = 0.0;
  double rate_hz = 0.0;
};

struct GroundTruth {
  std::vector<TruthSegment> segments;
  std::vector<double> chew_times_s;
  std::vector<double> swallow_times_s;
  std::vector<ChewRateTruth> chew_rates;  // one per inter-delivery interval holding chewing
};

struct TraceBundle {
  CsiTrace trace;
  std::optional<GroundTruth> ground_truth;
};

/// Deterministic in the scenario (including its seed).
TraceBundle generate(const SynthScenario& scenario);

// Canned scenarios used by training and evaluation.
SynthScenario delivery_scenario(Utensil u, double snr_db, std::uint64_t seed);
SynthScenario non_eating_scenario(NonEatingLabel label, double snr_db, std::uint64_t seed);
/// Chew bursts at one rate, each followed by a swallow; `bursts` in [1, 3].
SynthScenario chew_scenario(double rate_hz, int bursts, double snr_db, std::uint64_t seed);
/// Deliveries separated by chewing and a swallow; utensil drawn per delivery unless fixed.
SynthScenario meal_scenario(int deliveries, std::optional<Utensil> utensil, double snr_db, std::uint64_t seed);
/// Same layout with an explicit utensil per delivery.
SynthScenario meal_scenario(const std::vector<Utensil>& utensils, double snr_db, std::uint64_t seed);

void to_json(nlohmann::json& j, const ActivityEvent& e);
void from_json(const nlohmann::json& j, ActivityEvent& e);
void to_json(nlohmann::json& j, const SynthScenario& s);
/// Accepts `snr_db` in place of `noise_std`.
void from_json(const nlohmann::json& j, SynthScenario& s);
void to_json(nlohmann::json& j, const GroundTruth& g);
void from_json(const nlohmann::json& j, GroundTruth& g);

}  // namespace wieat
