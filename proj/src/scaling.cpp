#include "walkforge/scaling.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "walkforge/error.hpp"

namespace walkforge::scaling {

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error(Errc::EmptyRange, "quantile of empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

ScalerParams fit(const Matrix& matrix, IndexRange rows, std::vector<std::string> columns) {
  if (rows.empty()) throw Error(Errc::EmptyRange, "scaler fit over an empty row range");
  if (rows.end > matrix.rows()) throw Error(Errc::EmptyRange, "row range exceeds matrix");
  if (!columns.empty() && columns.size() != matrix.cols()) {
    throw Error(Errc::ColumnMismatch, "column names do not match matrix width");
  }

  ScalerParams params;
  params.columns = std::move(columns);
  params.center.resize(matrix.cols());
  params.scale.resize(matrix.cols());
  std::vector<double> sample(rows.size());
  for (std::size_t c = 0; c < matrix.cols(); ++c) {
    for (std::size_t r = rows.begin; r < rows.end; ++r) {
      const double v = matrix(r, c);
      if (!std::isfinite(v)) {
        throw Error(Errc::NonFiniteInput, "non-finite value in column " + std::to_string(c));
      }
      sample[r - rows.begin] = v;
    }
    std::sort(sample.begin(), sample.end());
    const double q1 = quantile_sorted(sample, 0.25);
    const double q3 = quantile_sorted(sample, 0.75);
    params.center[c] = quantile_sorted(sample, 0.5);
    params.scale[c] = q3 > q1 ? q3 - q1 : 1.0;
  }
  return params;
}

Matrix transform(const Matrix& matrix, const ScalerParams& params) {
  if (matrix.cols() != params.size()) {
    throw Error(Errc::ColumnMismatch, "matrix has " + std::to_string(matrix.cols()) +
                                          " columns, scaler has " + std::to_string(params.size()));
  }
  Matrix out(matrix.rows(), matrix.cols());
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
      out(r, c) = (matrix(r, c) - params.center[c]) / params.scale[c];
    }
  }
  return out;
}

Matrix transform(const Matrix& matrix, std::span<const std::string> columns,
                 const ScalerParams& params) {
  if (!std::equal(columns.begin(), columns.end(), params.columns.begin(), params.columns.end())) {
    throw Error(Errc::ColumnMismatch, "column names differ from the fitted scaler");
  }
  return transform(matrix, params);
}

Matrix inverse_transform(const Matrix& scaled, const ScalerParams& params) {
  if (scaled.cols() != params.size()) {
    throw Error(Errc::ColumnMismatch, "matrix has " + std::to_string(scaled.cols()) +
                                          " columns, scaler has " + std::to_string(params.size()));
  }
  Matrix out(scaled.rows(), scaled.cols());
  for (std::size_t r = 0; r < scaled.rows(); ++r) {
    for (std::size_t c = 0; c < scaled.cols(); ++c) {
      out(r, c) = scaled(r, c) * params.scale[c] + params.center[c];
    }
  }
  return out;
}

double transform_value(double x, const ScalerParams& params, std::size_t column) {
  return (x - params.center.at(column)) / params.scale.at(column);
}

double inverse_value(double y, const ScalerParams& params, std::size_t column) {
  return y * params.scale.at(column) + params.center.at(column);
}

std::string to_json(const ScalerParams& params) {
  nlohmann::ordered_json j;
  j["columns"] = params.columns;
  j["center"] = params.center;
  j["scale"] = params.scale;
  return j.dump();
}

ScalerParams from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    ScalerParams params;
    params.columns = j.at("columns").get<std::vector<std::string>>();
    params.center = j.at("center").get<std::vector<double>>();
    params.scale = j.at("scale").get<std::vector<double>>();
    if (params.center.size() != params.scale.size() ||
        (!params.columns.empty() && params.columns.size() != params.center.size())) {
      throw Error(Errc::ColumnMismatch, "scaler JSON arrays differ in length");
    }
    return params;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::BadArtifact, std::string("scaler JSON: ") + e.what());
  }
}

}  // namespace walkforge::scaling
