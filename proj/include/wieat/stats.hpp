#pragma once

#include "wieat/types.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace wieat {

/// Quantile with linear interpolation between order statistics (position q * (n - 1)).
template <typename Derived>
typename Derived::Scalar quantile(const Eigen::MatrixBase<Derived>& values, double q) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = values.size();
  if (n == 0) return Scalar(0);
  std::vector<Scalar> sorted(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) sorted[static_cast<std::size_t>(i)] = values(i);
  std::sort(sorted.begin(), sorted.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const Scalar frac = static_cast<Scalar>(pos - static_cast<double>(lo));
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

template <typename Derived>
typename Derived::Scalar median(const Eigen::MatrixBase<Derived>& values) {
  return quantile(values, 0.5);
}

}  // namespace wieat
