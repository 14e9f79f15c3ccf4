#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace wieat {

inline constexpr Eigen::Index kSubcarriers = 30;
inline constexpr Eigen::Index kFeatureCount = 14;
inline constexpr Eigen::Index kUtensilCount = 4;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using VectorXd = Eigen::VectorXd;
using MatrixXd = Eigen::MatrixXd;
using FeatureVector = Eigen::Matrix<double, kFeatureCount, 1>;

// Class order doubles as the tie-break order of the soft decision.
enum class Utensil : int { Fork = 0, KnifeFork = 1, Spoon = 2, Hand = 3 };

inline constexpr std::array<std::string_view, 4> kUtensilNames{"fork", "knife_fork", "spoon", "hand"};

constexpr std::string_view to_string(Utensil u) { return kUtensilNames[static_cast<std::size_t>(u)]; }

inline std::optional<Utensil> parse_utensil(std::string_view name) {
  for (std::size_t i = 0; i < kUtensilNames.size(); ++i) {
    if (kUtensilNames[i] == name) return static_cast<Utensil>(i);
  }
  return std::nullopt;
}

/// Half-open sample interval [start_idx, end_idx) with its time span in seconds.
struct ActivitySegment {
  Eigen::Index start_idx = 0;
  Eigen::Index end_idx = 0;
  double start_s = 0.0;
  double end_s = 0.0;

  Eigen::Index length() const { return end_idx - start_idx; }
  double duration() const { return end_s - start_s; }
  bool operator==(const ActivitySegment&) const = default;
};

}  // namespace wieat
