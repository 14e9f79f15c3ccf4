#pragma once

#include "wieat/error.hpp"
#include "wieat/types.hpp"

#include <json.hpp>

#include <cmath>
#include <string>

namespace wieat::json_eigen {

template <typename Derived>
nlohmann::json vector_to_json(const Eigen::MatrixBase<Derived>& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

/// Row-major nested array.
template <typename Derived>
nlohmann::json matrix_to_json(const Eigen::MatrixBase<Derived>& m) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

inline double finite_number(const nlohmann::json& j, const std::string& what) {
  if (!j.is_number()) throw Error(ErrorCode::InvalidModel, what + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw Error(ErrorCode::InvalidModel, what + ": non-finite value");
  return v;
}

/// Fills a fixed- or dynamic-size vector; the array length must match fixed sizes.
template <typename VectorType>
void vector_from_json(const nlohmann::json& j, VectorType& out, const std::string& what) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidModel, what + ": expected an array");
  const auto n = static_cast<Eigen::Index>(j.size());
  if constexpr (VectorType::SizeAtCompileTime == Eigen::Dynamic) {
    out.resize(n);
  } else if (n != VectorType::SizeAtCompileTime) {
    throw Error(ErrorCode::InvalidModel, what + ": expected " + std::to_string(VectorType::SizeAtCompileTime) + " entries");
  }
  for (Eigen::Index i = 0; i < n; ++i) out(i) = finite_number(j[static_cast<std::size_t>(i)], what);
}

template <typename MatrixType>
void matrix_from_json(const nlohmann::json& j, MatrixType& out, const std::string& what) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) throw Error(ErrorCode::InvalidModel, what + ": expected a nested array");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  if constexpr (MatrixType::RowsAtCompileTime == Eigen::Dynamic || MatrixType::ColsAtCompileTime == Eigen::Dynamic) {
    out.resize(rows, cols);
  }
  if (out.rows() != rows || out.cols() != cols) throw Error(ErrorCode::InvalidModel, what + ": wrong shape");
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw Error(ErrorCode::InvalidModel, what + ": ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = finite_number(row[static_cast<std::size_t>(c)], what);
  }
}

/// Copies j[key] into `out` when present.
template <typename T>
void optional_field(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace wieat::json_eigen
