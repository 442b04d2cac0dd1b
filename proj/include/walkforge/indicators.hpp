#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "walkforge/ingest.hpp"
#include "walkforge/matrix.hpp"

namespace walkforge::indicators {

enum class Kind { SMA, WMA, EMA, DEMA, TEMA, STD, VAR, RSI, ROC, BOLL_UP, BOLL_LO, MACD };

inline constexpr std::array<Kind, 12> kAllKinds = {
    Kind::SMA, Kind::WMA, Kind::EMA, Kind::DEMA,    Kind::TEMA,    Kind::STD,
    Kind::VAR, Kind::RSI, Kind::ROC, Kind::BOLL_UP, Kind::BOLL_LO, Kind::MACD,
};

inline constexpr std::array<std::size_t, 3> kDefaultWindows = {7, 30, 90};

/// Lower-case name used in feature labels, e.g. "boll_up".
std::string_view kind_name(Kind kind) noexcept;

struct IndicatorSpec {
  Kind kind;
  std::size_t window;
};

struct IndicatorSeries {
  std::vector<double> values;  // NaN before valid_from
  std::size_t valid_from = 0;
};

IndicatorSeries compute_indicator(std::span<const double> x, const IndicatorSpec& spec);

/// Exponential moving average seeded at x[0] with alpha = 2 / (window + 1).
std::vector<double> ema(std::span<const double> x, std::size_t window);

struct FeatureMatrix {
  std::vector<std::string> names;
  std::vector<std::int64_t> dates;
  Matrix values;                        // rows = days, cols = features
  std::vector<std::size_t> valid_from;  // per column
  std::size_t usable_from = 0;          // first row where every column is usable

  std::size_t rows() const noexcept { return values.rows(); }
  std::size_t cols() const noexcept { return values.cols(); }
  std::size_t column_index(std::string_view name) const;
};

/// Raw columns verbatim followed by every (column, kind, window) indicator,
/// named `<column>_<kind>_<window>`.
FeatureMatrix expand_features(const ingest::RawSeries& raw,
                              std::span<const std::size_t> windows = kDefaultWindows);

/// Number of raw rows expand_features needs for the given windows.
std::size_t required_rows(std::span<const std::size_t> windows = kDefaultWindows);

/// Row at which the EMA-family warm-up is considered finished: 2 * max(window) - 1.
std::size_t warmup_rows(std::span<const std::size_t> windows = kDefaultWindows);

void write_feature_csv(const FeatureMatrix& fm, std::ostream& out);

/// Binary cache: "WFFM", u16 version, u64 n, u64 p, n*p little-endian doubles
/// (row-major), then a trailer carrying usable_from, valid_from, dates and names.
void save_cache(const FeatureMatrix& fm, const std::filesystem::path& path);
FeatureMatrix load_cache(const std::filesystem::path& path);

}  // namespace walkforge::indicators
