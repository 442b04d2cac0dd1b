#include "walkforge/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "walkforge/binary_io.hpp"
#include "walkforge/error.hpp"

namespace walkforge::indicators {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint16_t kCacheVersion = 1;

double window_mean(std::span<const double> x, std::size_t t, std::size_t w) {
  double sum = 0.0;
  for (std::size_t i = t + 1 - w; i <= t; ++i) sum += x[i];
  return sum / static_cast<double>(w);
}

double window_variance(std::span<const double> x, std::size_t t, std::size_t w) {
  const double mean = window_mean(x, t, w);
  double ss = 0.0;
  for (std::size_t i = t + 1 - w; i <= t; ++i) ss += (x[i] - mean) * (x[i] - mean);
  return ss / static_cast<double>(w - 1);
}

IndicatorSeries windowed(std::span<const double> x, std::size_t valid_from,
                         auto&& at) {
  IndicatorSeries out{std::vector<double>(x.size(), kNaN), valid_from};
  for (std::size_t t = valid_from; t < x.size(); ++t) out.values[t] = at(t);
  return out;
}

}  // namespace

std::string_view kind_name(Kind kind) noexcept {
  switch (kind) {
    case Kind::SMA: return "sma";
    case Kind::WMA: return "wma";
    case Kind::EMA: return "ema";
    case Kind::DEMA: return "dema";
    case Kind::TEMA: return "tema";
    case Kind::STD: return "std";
    case Kind::VAR: return "var";
    case Kind::RSI: return "rsi";
    case Kind::ROC: return "roc";
    case Kind::BOLL_UP: return "boll_up";
    case Kind::BOLL_LO: return "boll_lo";
    case Kind::MACD: return "macd";
  }
  return "?";
}

std::vector<double> ema(std::span<const double> x, std::size_t window) {
  std::vector<double> out(x.size());
  if (x.empty()) return out;
  const double alpha = 2.0 / (static_cast<double>(window) + 1.0);
  out[0] = x[0];
  for (std::size_t t = 1; t < x.size(); ++t) out[t] = alpha * x[t] + (1.0 - alpha) * out[t - 1];
  return out;
}

IndicatorSeries compute_indicator(std::span<const double> x, const IndicatorSpec& spec) {
  const std::size_t w = spec.window;
  if (w < 2) throw Error(Errc::InvalidSpec, "window must be >= 2");
  if (x.empty()) throw Error(Errc::InvalidSpec, "empty input series");
  const std::size_t n = x.size();

  switch (spec.kind) {
    case Kind::SMA:
      return windowed(x, w - 1, [&](std::size_t t) { return window_mean(x, t, w); });
    case Kind::WMA: {
      const double denom = static_cast<double>(w * (w + 1)) / 2.0;
      return windowed(x, w - 1, [&](std::size_t t) {
        double sum = 0.0;
        for (std::size_t i = 1; i <= w; ++i) sum += static_cast<double>(i) * x[t - w + i];
        return sum / denom;
      });
    }
    case Kind::EMA:
      return {ema(x, w), 0};
    case Kind::DEMA: {
      const auto e1 = ema(x, w);
      const auto e2 = ema(e1, w);
      IndicatorSeries out{std::vector<double>(n), 0};
      for (std::size_t t = 0; t < n; ++t) out.values[t] = 2.0 * e1[t] - e2[t];
      return out;
    }
    case Kind::TEMA: {
      const auto e1 = ema(x, w);
      const auto e2 = ema(e1, w);
      const auto e3 = ema(e2, w);
      IndicatorSeries out{std::vector<double>(n), 0};
      for (std::size_t t = 0; t < n; ++t) out.values[t] = 3.0 * e1[t] - 3.0 * e2[t] + e3[t];
      return out;
    }
    case Kind::STD:
      return windowed(x, w - 1,
                      [&](std::size_t t) { return std::sqrt(window_variance(x, t, w)); });
    case Kind::VAR:
      return windowed(x, w - 1, [&](std::size_t t) { return window_variance(x, t, w); });
    case Kind::RSI:
      return windowed(x, w, [&](std::size_t t) {
        double gain = 0.0;
        double loss = 0.0;
        for (std::size_t i = t + 1 - w; i <= t; ++i) {
          const double d = x[i] - x[i - 1];
          gain += std::max(d, 0.0);
          loss += std::max(-d, 0.0);
        }
        gain /= static_cast<double>(w);
        loss /= static_cast<double>(w);
        if (loss == 0.0) return gain == 0.0 ? 50.0 : 100.0;
        return 100.0 - 100.0 / (1.0 + gain / loss);
      });
    case Kind::ROC:
      return windowed(x, w, [&](std::size_t t) {
        const double base = x[t - w];
        if (base == 0.0) throw Error(Errc::ZeroDenominator, "ROC at t=" + std::to_string(t));
        return 100.0 * (x[t] - base) / base;
      });
    case Kind::BOLL_UP:
    case Kind::BOLL_LO: {
      const double sign = spec.kind == Kind::BOLL_UP ? 2.0 : -2.0;
      return windowed(x, w - 1, [&](std::size_t t) {
        return window_mean(x, t, w) + sign * std::sqrt(window_variance(x, t, w));
      });
    }
    case Kind::MACD: {
      const auto fast = ema(x, w);
      const auto slow = ema(x, 2 * w);
      IndicatorSeries out{std::vector<double>(n), 0};
      for (std::size_t t = 0; t < n; ++t) out.values[t] = fast[t] - slow[t];
      return out;
    }
  }
  throw Error(Errc::InvalidSpec, "unknown indicator kind");
}

std::size_t FeatureMatrix::column_index(std::string_view name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw Error(Errc::MissingColumn, std::string(name));
  return static_cast<std::size_t>(it - names.begin());
}

std::size_t warmup_rows(std::span<const std::size_t> windows) {
  const std::size_t longest = windows.empty() ? 1 : *std::max_element(windows.begin(), windows.end());
  return 2 * longest - 1;
}

std::size_t required_rows(std::span<const std::size_t> windows) {
  return warmup_rows(windows) + 2;
}

FeatureMatrix expand_features(const ingest::RawSeries& raw, std::span<const std::size_t> windows) {
  if (windows.empty()) throw Error(Errc::InvalidSpec, "no indicator windows");
  const std::size_t n = raw.size();
  const std::size_t required = required_rows(windows);
  if (n < required) {
    throw Error(Errc::SeriesTooShort,
                "n=" + std::to_string(n) + ", required=" + std::to_string(required));
  }

  const std::size_t n_raw = raw.columns.size();
  const std::size_t p = n_raw * (1 + kAllKinds.size() * windows.size());
  FeatureMatrix fm;
  fm.dates = raw.dates;
  fm.values = Matrix(n, p);
  fm.names.reserve(p);
  fm.valid_from.reserve(p);

  const auto put = [&](std::string name, const std::vector<double>& values, std::size_t from) {
    const std::size_t c = fm.names.size();
    for (std::size_t t = 0; t < n; ++t) fm.values(t, c) = values[t];
    fm.names.push_back(std::move(name));
    fm.valid_from.push_back(from);
  };

  for (std::size_t j = 0; j < n_raw; ++j) put(raw.names[j], raw.columns[j], 0);
  for (std::size_t j = 0; j < n_raw; ++j) {
    for (const Kind kind : kAllKinds) {
      for (const std::size_t w : windows) {
        auto series = compute_indicator(raw.columns[j], {kind, w});
        put(raw.names[j] + "_" + std::string(kind_name(kind)) + "_" + std::to_string(w),
            series.values, series.valid_from);
      }
    }
  }

  fm.usable_from = std::max(*std::max_element(fm.valid_from.begin(), fm.valid_from.end()),
                            warmup_rows(windows));
  return fm;
}

void write_feature_csv(const FeatureMatrix& fm, std::ostream& out) {
  out << "date";
  for (const auto& name : fm.names) out << ',' << name;
  out << '\n';
  char buf[32];
  for (std::size_t t = 0; t < fm.rows(); ++t) {
    out << ingest::format_date(fm.dates[t]);
    for (const double v : fm.values.row(t)) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << ',' << buf;
    }
    out << '\n';
  }
}

void save_cache(const FeatureMatrix& fm, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(Errc::BadArtifact, "cannot write " + path.string());
  binio::write_magic(os, "WFFM");
  binio::write<std::uint16_t>(os, kCacheVersion);
  binio::write<std::uint64_t>(os, fm.rows());
  binio::write<std::uint64_t>(os, fm.cols());
  binio::write_doubles(os, fm.values.flat());
  binio::write<std::uint64_t>(os, fm.usable_from);
  for (const auto v : fm.valid_from) binio::write<std::uint64_t>(os, v);
  for (const auto d : fm.dates) binio::write<std::int64_t>(os, d);
  for (const auto& name : fm.names) binio::write_string(os, name);
}

FeatureMatrix load_cache(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(Errc::BadArtifact, "cannot open " + path.string());
  binio::expect_magic(is, "WFFM");
  const auto version = binio::read<std::uint16_t>(is);
  if (version != kCacheVersion) {
    throw Error(Errc::BadArtifact, "unsupported feature cache version " + std::to_string(version));
  }
  const auto n = binio::read<std::uint64_t>(is);
  const auto p = binio::read<std::uint64_t>(is);
  FeatureMatrix fm;
  fm.values = Matrix(n, p);
  binio::read_doubles(is, fm.values.flat());
  fm.usable_from = binio::read<std::uint64_t>(is);
  fm.valid_from.resize(p);
  for (auto& v : fm.valid_from) v = binio::read<std::uint64_t>(is);
  fm.dates.resize(n);
  for (auto& d : fm.dates) d = binio::read<std::int64_t>(is);
  fm.names.resize(p);
  for (auto& name : fm.names) name = binio::read_string(is);
  return fm;
}

}  // namespace walkforge::indicators
