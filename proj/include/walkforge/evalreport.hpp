#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "walkforge/range.hpp"

namespace walkforge::evalreport {

enum class Split { Train, Test };

std::string_view split_name(Split split) noexcept;
Split parse_split(std::string_view name);

struct Metrics {
  double rmse = 0.0;
  double mae = 0.0;
  double mape = 0.0;  // fraction, not percent
};

/// RMSE and MAE in the units of the inputs, MAPE as a fraction.
Metrics metrics(std::span<const double> preds, std::span<const double> actual);

struct BatchMetrics {
  std::string model;
  std::size_t batch = 0;
  Split split = Split::Test;
  Metrics values;
};

using GroupKey = std::pair<std::string, Split>;

struct EvaluationReport {
  std::vector<BatchMetrics> runs;
  std::vector<std::string> models;  // display order
  std::map<GroupKey, Metrics> mean;
  std::map<GroupKey, Metrics> median;
  std::map<GroupKey, std::size_t> counts;
};

/// Median of an arbitrary sample; even sizes average the two central values.
double median(std::vector<double> values);

/// Per (model, split) mean and median across batches. Independent of the
/// order of `runs`.
EvaluationReport aggregate(std::vector<BatchMetrics> runs);

/// Naive forecaster close[t+1] = close[t] over every t, t+1 in `range`.
BatchMetrics persistence_baseline(std::span<const double> close_usd, IndexRange range,
                                  std::size_t batch = 0, Split split = Split::Test);

/// Canonical display position of a model name (lr, svr, lstm, proposed first).
int model_rank(std::string_view model) noexcept;
std::string display_name(std::string_view model);

/// Text table with a mean block and a median block: one row per model,
/// columns RMSE/MAE/MAPE x train/test.
std::string render_table(const EvaluationReport& report, bool mape_percent = false);

nlohmann::ordered_json runs_to_json(std::span<const BatchMetrics> runs);
std::vector<BatchMetrics> runs_from_json(const nlohmann::json& j);
nlohmann::ordered_json aggregates_to_json(const EvaluationReport& report);

/// Published figures carried for side-by-side reading only; never asserted.
nlohmann::ordered_json reference_json();

struct SeriesPoint {
  std::size_t row = 0;
  double value = 0.0;
};

/// Static SVG line chart: actual close plus one polyline per model.
void write_svg_chart(const std::filesystem::path& path, std::span<const SeriesPoint> actual,
                     const std::map<std::string, std::vector<SeriesPoint>>& predicted);

}  // namespace walkforge::evalreport
