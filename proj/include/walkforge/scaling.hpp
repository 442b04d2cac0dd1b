#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "walkforge/matrix.hpp"
#include "walkforge/range.hpp"

namespace walkforge::scaling {

/// Per-column median and interquartile range. A column whose IQR is zero
/// gets scale 1.0 so the transform stays total.
struct ScalerParams {
  std::vector<std::string> columns;
  std::vector<double> center;
  std::vector<double> scale;

  std::size_t size() const noexcept { return center.size(); }
};

/// Quantile of an ascending-sorted sample by linear interpolation at
/// position q * (m - 1).
double quantile_sorted(std::span<const double> sorted, double q);

ScalerParams fit(const Matrix& matrix, IndexRange rows, std::vector<std::string> columns = {});

Matrix transform(const Matrix& matrix, const ScalerParams& params);
Matrix inverse_transform(const Matrix& scaled, const ScalerParams& params);

/// Same as above, but also checks the caller's column names against the fit.
Matrix transform(const Matrix& matrix, std::span<const std::string> columns,
                 const ScalerParams& params);

double transform_value(double x, const ScalerParams& params, std::size_t column);
double inverse_value(double y, const ScalerParams& params, std::size_t column);

/// `{"columns":[...],"center":[...],"scale":[...]}`
std::string to_json(const ScalerParams& params);
ScalerParams from_json(std::string_view text);

}  // namespace walkforge::scaling
