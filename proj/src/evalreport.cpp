#include "walkforge/evalreport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "walkforge/error.hpp"

namespace walkforge::evalreport {

namespace {

// Sorting before summing makes the mean independent of input order.
double order_free_mean(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

struct ReferenceRow {
  const char* model;
  double mean[6];    // rmse train/test, mae train/test, mape train/test
  double median[6];
};

constexpr ReferenceRow kPublishedReference[] = {
    {"lr", {378.9091, 674.032, 246.3711, 546.109, 0.1945, 0.22664},
     {298.8742, 373.9383, 216.6750, 312.1933, 0.0554, 0.0687}},
    {"svr", {380.7813, 898.2263, 239.8385, 738.6972, 0.1370, 0.1850},
     {299.1291, 403.4483, 201.6113, 340.4691, 0.05493, 0.0856}},
    {"lstm", {262.8562, 455.5994, 149.1471, 377.3157, 0.0297, 0.0337},
     {211.8146, 215.4055, 122.4450, 154.995, 0.0258, 0.03073}},
    {"proposed", {268.3314, 450.3816, 152.8135, 334.6625, 0.0312, 0.0316},
     {215.9530, 197.4914, 125.0576, 135.7671, 0.02647, 0.0316}},
};

nlohmann::ordered_json metric_json(const Metrics& m) {
  return {{"rmse", m.rmse}, {"mae", m.mae}, {"mape", m.mape}};
}

}  // namespace

std::string_view split_name(Split split) noexcept {
  return split == Split::Train ? "train" : "test";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::Train;
  if (name == "test") return Split::Test;
  throw Error(Errc::BadArtifact, "unknown split '" + std::string(name) + "'");
}

Metrics metrics(std::span<const double> preds, std::span<const double> actual) {
  if (preds.size() != actual.size()) {
    throw Error(Errc::LengthMismatch, std::to_string(preds.size()) + " predictions vs " +
                                          std::to_string(actual.size()) + " actuals");
  }
  if (preds.empty()) throw Error(Errc::EmptyGroup, "no predictions to score");
  double sq = 0.0;
  double abs_sum = 0.0;
  double pct = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (actual[i] == 0.0) throw Error(Errc::ZeroActual, "actual value at index " + std::to_string(i));
    const double e = preds[i] - actual[i];
    sq += e * e;
    abs_sum += std::abs(e);
    pct += std::abs(e) / std::abs(actual[i]);
  }
  const double m = static_cast<double>(preds.size());
  return {std::sqrt(sq / m), abs_sum / m, pct / m};
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error(Errc::EmptyGroup, "median of empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t k = values.size();
  return k % 2 == 1 ? values[k / 2] : 0.5 * (values[k / 2 - 1] + values[k / 2]);
}

int model_rank(std::string_view model) noexcept {
  static constexpr std::string_view order[] = {"lr", "svr", "lstm", "proposed", "persistence"};
  for (int i = 0; i < 5; ++i) {
    if (order[i] == model) return i;
  }
  return 5;
}

std::string display_name(std::string_view model) {
  if (model == "lr") return "LR";
  if (model == "svr") return "SVR";
  if (model == "lstm") return "LSTM";
  if (model == "proposed") return "Proposed";
  if (model == "persistence") return "Persistence";
  return std::string(model);
}

EvaluationReport aggregate(std::vector<BatchMetrics> runs) {
  if (runs.empty()) throw Error(Errc::EmptyGroup, "no batch metrics to aggregate");
  std::sort(runs.begin(), runs.end(), [](const BatchMetrics& a, const BatchMetrics& b) {
    const int ra = model_rank(a.model);
    const int rb = model_rank(b.model);
    if (ra != rb) return ra < rb;
    if (a.model != b.model) return a.model < b.model;
    if (a.split != b.split) return a.split < b.split;
    return a.batch < b.batch;
  });

  EvaluationReport report;
  std::map<GroupKey, std::vector<Metrics>> groups;
  for (const auto& run : runs) {
    groups[{run.model, run.split}].push_back(run.values);
    if (std::find(report.models.begin(), report.models.end(), run.model) == report.models.end()) {
      report.models.push_back(run.model);
    }
  }
  for (const auto& [key, values] : groups) {
    std::vector<double> rmse, mae, mape;
    for (const auto& m : values) {
      rmse.push_back(m.rmse);
      mae.push_back(m.mae);
      mape.push_back(m.mape);
    }
    report.mean[key] = {order_free_mean(rmse), order_free_mean(mae), order_free_mean(mape)};
    report.median[key] = {median(rmse), median(mae), median(mape)};
    report.counts[key] = values.size();
  }
  report.runs = std::move(runs);
  return report;
}

BatchMetrics persistence_baseline(std::span<const double> close_usd, IndexRange range,
                                  std::size_t batch, Split split) {
  if (range.size() < 2) throw Error(Errc::RangeTooShort, "persistence needs at least two rows");
  if (range.end > close_usd.size()) throw Error(Errc::DimensionMismatch, "range exceeds series");
  const auto preds = close_usd.subspan(range.begin, range.size() - 1);
  const auto actual = close_usd.subspan(range.begin + 1, range.size() - 1);
  return {"persistence", batch, split, metrics(preds, actual)};
}

std::string render_table(const EvaluationReport& report, bool mape_percent) {
  std::ostringstream os;
  char buf[256];
  const auto rule = std::string(96, '-');
  const auto block = [&](const char* title, const std::map<GroupKey, Metrics>& values) {
    os << rule << '\n';
    std::snprintf(buf, sizeof buf, "%-12s | %s\n", "", title);
    os << buf;
    std::snprintf(buf, sizeof buf, "%-12s | %-25s | %-25s | %-25s\n", "Methods", "RMSE", "MAE",
                  mape_percent ? "MAPE (%)" : "MAPE");
    os << buf;
    std::snprintf(buf, sizeof buf, "%-12s | %12s %12s | %12s %12s | %12s %12s\n", "", "train",
                  "test", "train", "test", "train", "test");
    os << buf << rule << '\n';
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& model : report.models) {
      const auto get = [&](Split s) {
        const auto it = values.find({model, s});
        return it == values.end() ? Metrics{nan, nan, nan} : it->second;
      };
      const Metrics tr = get(Split::Train);
      const Metrics te = get(Split::Test);
      const double scale = mape_percent ? 100.0 : 1.0;
      std::snprintf(buf, sizeof buf, "%-12s | %12.4f %12.4f | %12.4f %12.4f | %12.5f %12.5f\n",
                    display_name(model).c_str(), tr.rmse, te.rmse, tr.mae, te.mae,
                    tr.mape * scale, te.mape * scale);
      os << buf;
    }
  };
  block("Mean of Metrics", report.mean);
  block("Median of Metrics", report.median);
  os << rule << '\n';
  return os.str();
}

nlohmann::ordered_json runs_to_json(std::span<const BatchMetrics> runs) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& r : runs) {
    out.push_back({{"model", r.model},
                   {"batch", r.batch},
                   {"split", split_name(r.split)},
                   {"rmse", r.values.rmse},
                   {"mae", r.values.mae},
                   {"mape", r.values.mape}});
  }
  return out;
}

std::vector<BatchMetrics> runs_from_json(const nlohmann::json& j) {
  std::vector<BatchMetrics> runs;
  try {
    for (const auto& r : j) {
      runs.push_back({r.at("model").get<std::string>(), r.at("batch").get<std::size_t>(),
                      parse_split(r.at("split").get<std::string>()),
                      {r.at("rmse").get<double>(), r.at("mae").get<double>(),
                       r.at("mape").get<double>()}});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::BadArtifact, std::string("metrics JSON: ") + e.what());
  }
  return runs;
}

nlohmann::ordered_json aggregates_to_json(const EvaluationReport& report) {
  nlohmann::ordered_json out;
  for (const auto* name : {"mean", "median"}) {
    const auto& values = std::string_view(name) == "mean" ? report.mean : report.median;
    nlohmann::ordered_json block = nlohmann::ordered_json::object();
    for (const auto& model : report.models) {
      nlohmann::ordered_json per_model = nlohmann::ordered_json::object();
      for (const Split s : {Split::Train, Split::Test}) {
        const auto it = values.find({model, s});
        if (it != values.end()) per_model[std::string(split_name(s))] = metric_json(it->second);
      }
      block[model] = per_model;
    }
    out[name] = block;
  }
  return out;
}

nlohmann::ordered_json reference_json() {
  nlohmann::ordered_json out;
  out["source"] = "published";
  out["asserted"] = false;
  out["note"] = "published figures on a different dataset; shown for comparison only";
  for (const auto* name : {"mean", "median"}) {
    nlohmann::ordered_json block;
    for (const auto& row : kPublishedReference) {
      const double* v = std::string_view(name) == "mean" ? row.mean : row.median;
      block[row.model] = {{"train", {{"rmse", v[0]}, {"mae", v[2]}, {"mape", v[4]}}},
                          {"test", {{"rmse", v[1]}, {"mae", v[3]}, {"mape", v[5]}}}};
    }
    out[name] = block;
  }
  return out;
}

void write_svg_chart(const std::filesystem::path& path, std::span<const SeriesPoint> actual,
                     const std::map<std::string, std::vector<SeriesPoint>>& predicted) {
  if (actual.empty()) throw Error(Errc::EmptyGroup, "nothing to plot");
  constexpr double width = 1000.0;
  constexpr double height = 400.0;
  constexpr double pad = 40.0;
  double x_lo = static_cast<double>(actual.front().row);
  double x_hi = x_lo;
  double y_lo = actual.front().value;
  double y_hi = y_lo;
  const auto extend = [&](const SeriesPoint& p) {
    x_lo = std::min(x_lo, static_cast<double>(p.row));
    x_hi = std::max(x_hi, static_cast<double>(p.row));
    y_lo = std::min(y_lo, p.value);
    y_hi = std::max(y_hi, p.value);
  };
  for (const auto& p : actual) extend(p);
  for (const auto& [_, series] : predicted) {
    for (const auto& p : series) extend(p);
  }
  if (x_hi == x_lo) x_hi = x_lo + 1.0;
  if (y_hi == y_lo) y_hi = y_lo + 1.0;

  const auto polyline = [&](std::span<const SeriesPoint> series, const char* colour) {
    std::ostringstream os;
    os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1\" points=\"";
    char buf[64];
    for (const auto& p : series) {
      const double x = pad + (static_cast<double>(p.row) - x_lo) / (x_hi - x_lo) * (width - 2 * pad);
      const double y = height - pad - (p.value - y_lo) / (y_hi - y_lo) * (height - 2 * pad);
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", x, y);
      os << buf;
    }
    os << "\"/>\n";
    return os.str();
  };

  static constexpr const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"};
  std::ofstream out(path);
  if (!out) throw Error(Errc::BadArtifact, "cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << polyline(actual, "black");
  out << "<text x=\"" << pad << "\" y=\"20\" font-size=\"12\">actual</text>\n";
  std::size_t k = 0;
  for (const auto& [model, series] : predicted) {
    const char* colour = palette[k % 5];
    out << polyline(series, colour);
    out << "<text x=\"" << pad + 80.0 * static_cast<double>(k + 1) << "\" y=\"20\" font-size=\"12\" fill=\""
        << colour << "\">" << display_name(model) << "</text>\n";
    ++k;
  }
  out << "</svg>\n";
}

}  // namespace walkforge::evalreport
