#pragma once

// JSON <-> Eigen helpers shared by the file readers. Not installed.

#include <string>

#include <json.hpp>

#include "drro/errors.hpp"
#include "drro/numerics.hpp"

namespace drro::detail {

using nlohmann::json;

// Rectangular array of rows under `key`; kParseError / kDimensionMismatch.
inline Matrix matrix_from_json(const json& j, const std::string& key) {
  if (!j.contains(key)) fail(ErrorKind::kParseError, "missing key '" + key + "'");
  const json& rows = j.at(key);
  if (!rows.is_array() || rows.empty()) {
    fail(ErrorKind::kParseError, "'" + key + "' must be a non-empty array of rows");
  }
  const std::size_t n_rows = rows.size();
  std::size_t n_cols = 0;
  for (std::size_t i = 0; i < n_rows; ++i) {
    if (!rows[i].is_array()) {
      fail(ErrorKind::kParseError, "'" + key + "' row " + std::to_string(i) + " is not an array");
    }
    if (i == 0) n_cols = rows[i].size();
    if (rows[i].size() != n_cols || n_cols == 0) {
      fail(ErrorKind::kDimensionMismatch, "'" + key + "' is not rectangular");
    }
  }
  Matrix m(n_rows, n_cols);
  for (std::size_t i = 0; i < n_rows; ++i) {
    for (std::size_t c = 0; c < n_cols; ++c) {
      const json& v = rows[i][c];
      if (!v.is_number()) {
        fail(ErrorKind::kParseError, "'" + key + "' has a non-numeric entry");
      }
      m(i, c) = v.get<double>();
      if (!std::isfinite(m(i, c))) {
        fail(ErrorKind::kParseError, "'" + key + "' has a non-finite entry");
      }
    }
  }
  return m;
}

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}


}  // namespace drro::detail
