#include "walkforge/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "walkforge/error.hpp"

namespace walkforge::ingest {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = kNaN;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) return kNaN;
  return value;
}

}  // namespace

const std::vector<std::string>& default_schema() {
  static const std::vector<std::string> schema = {
      "open",           "close",          "high",           "low",
      "transactions",   "avg_block_size", "sent_by_address", "avg_difficulty",
      "avg_hashrate",   "mining_profitability", "sent_usd", "avg_tx_fee",
      "median_tx_fee",  "avg_block_time", "avg_tx_value",   "median_tx_value",
      "tweets",         "google_trends",  "active_addresses", "top100_pct",
      "avg_fee_to_reward", "coins_in_circulation", "miner_revenue",
  };
  return schema;
}

std::size_t RawSeries::column_index(std::string_view name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw Error(Errc::MissingColumn, std::string(name));
  return static_cast<std::size_t>(it - names.begin());
}

std::int64_t parse_date(std::string_view iso) {
  iso = trim(iso);
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  const auto bad = [&] { return Error(Errc::ParseError, "bad date '" + std::string(iso) + "'"); };
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') throw bad();
  const auto parse_part = [&](std::size_t pos, std::size_t len, auto& out) {
    const auto [ptr, ec] = std::from_chars(iso.data() + pos, iso.data() + pos + len, out);
    if (ec != std::errc{} || ptr != iso.data() + pos + len) throw bad();
  };
  parse_part(0, 4, y);
  parse_part(5, 2, m);
  parse_part(8, 2, d);
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) throw bad();
  return std::chrono::sys_days{ymd}.time_since_epoch().count();
}

std::string format_date(std::int64_t days) {
  const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

RawSeries read_csv(std::istream& in, const std::vector<std::string>& schema) {
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) throw Error(Errc::EmptyFile, "no header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  const auto header = split_fields(line);
  std::vector<std::string> header_names;
  for (const auto h : header) header_names.emplace_back(trim(h));

  const auto find_col = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header_names.begin(), header_names.end(), name);
    if (it == header_names.end()) throw Error(Errc::MissingColumn, name);
    return static_cast<std::size_t>(it - header_names.begin());
  };
  const std::size_t date_col = find_col("date");
  std::vector<std::size_t> source(schema.size());
  for (std::size_t j = 0; j < schema.size(); ++j) source[j] = find_col(schema[j]);

  struct Row {
    std::int64_t date;
    std::vector<double> values;
  };
  std::vector<Row> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header_names.size()) {
      throw Error(Errc::ParseError, "line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(header_names.size()) + " fields");
    }
    Row row{parse_date(fields[date_col]), std::vector<double>(schema.size())};
    for (std::size_t j = 0; j < schema.size(); ++j) row.values[j] = parse_number(fields[source[j]]);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(Errc::EmptyFile, "no data rows");

  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].date == rows[i - 1].date) {
      throw Error(Errc::DuplicateDate, format_date(rows[i].date));
    }
  }

  RawSeries out;
  out.names = schema;
  out.columns.assign(schema.size(), std::vector<double>(rows.size()));
  out.dates.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.dates.push_back(rows[i].date);
    for (std::size_t j = 0; j < schema.size(); ++j) out.columns[j][i] = rows[i].values[j];
  }
  return out;
}

RawSeries load_csv(const std::filesystem::path& path, const std::vector<std::string>& schema) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::EmptyFile, "cannot open " + path.string());
  return read_csv(in, schema);
}

void write_csv(const RawSeries& series, std::ostream& out) {
  out << "date";
  for (const auto& name : series.names) out << ',' << name;
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < series.size(); ++i) {
    out << format_date(series.dates[i]);
    for (const auto& col : series.columns) {
      std::snprintf(buf, sizeof buf, "%.17g", col[i]);
      out << ',' << buf;
    }
    out << '\n';
  }
}

void write_csv(const RawSeries& series, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::BadArtifact, "cannot write " + path.string());
  write_csv(series, out);
}

RawSeries clean(const RawSeries& series, const CleanPolicy& policy) {
  if (series.size() == 0) throw Error(Errc::EmptyFile, "empty series");
  const std::size_t cap =
      policy.fill == FillMode::Reject ? 0 : policy.max_consecutive_fill;

  // Reindex onto the full daily calendar; inserted days start as NaN.
  const std::int64_t first = series.dates.front();
  const std::int64_t last = series.dates.back();
  const auto n = static_cast<std::size_t>(last - first + 1);

  RawSeries out;
  out.names = series.names;
  out.dates.resize(n);
  std::iota(out.dates.begin(), out.dates.end(), first);
  out.columns.assign(series.columns.size(), std::vector<double>(n, kNaN));
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto slot = static_cast<std::size_t>(series.dates[i] - first);
    for (std::size_t j = 0; j < series.columns.size(); ++j) {
      const double v = series.columns[j][i];
      out.columns[j][slot] = std::isfinite(v) ? v : kNaN;
    }
  }

  for (std::size_t j = 0; j < out.columns.size(); ++j) {
    auto& col = out.columns[j];
    if (std::isnan(col[0])) {
      if (policy.fill == FillMode::Reject) {
        throw Error(Errc::GapTooLong, out.names[j] + " at " + format_date(out.dates[0]));
      }
      throw Error(Errc::LeadingNaN, out.names[j]);
    }
    std::size_t t = 1;
    while (t < n) {
      if (!std::isnan(col[t])) {
        ++t;
        continue;
      }
      std::size_t end = t;
      while (end < n && std::isnan(col[end])) ++end;
      if (end - t > cap) {
        throw Error(Errc::GapTooLong, out.names[j] + " at " + format_date(out.dates[t]));
      }
      std::fill(col.begin() + static_cast<std::ptrdiff_t>(t),
                col.begin() + static_cast<std::ptrdiff_t>(end), col[t - 1]);
      t = end;
    }
  }

  const auto has = [&](const char* name) {
    return std::find(out.names.begin(), out.names.end(), name) != out.names.end();
  };
  if (has("open") && has("close") && has("high") && has("low")) {
    const auto& open = out.column("open");
    const auto& close = out.column("close");
    const auto& high = out.column("high");
    const auto& low = out.column("low");
    for (std::size_t t = 0; t < n; ++t) {
      const bool positive = open[t] > 0 && close[t] > 0 && high[t] > 0 && low[t] > 0;
      const bool bracketed = low[t] <= std::min(open[t], close[t]) &&
                             std::max(open[t], close[t]) <= high[t];
      if (!positive || !bracketed) {
        throw Error(Errc::InvalidOhlc, "row " + format_date(out.dates[t]));
      }
    }
  }
  return out;
}

RawSeries synthesize(std::size_t n, std::uint64_t seed, const SynthConfig& config) {
  if (n < 1) throw Error(Errc::InvalidConfig, "synthesize needs n >= 1");
  if (!(config.volatility > 0) || !std::isfinite(config.volatility)) {
    throw Error(Errc::InvalidConfig, "volatility must be positive");
  }
  if (!(config.initial_price > 0) || !(config.range_noise >= 0) || !(config.aux_noise > 0) ||
      !(config.aux_correlation >= 0)) {
    throw Error(Errc::InvalidConfig, "initial_price and aux_noise must be positive");
  }

  const auto& schema = default_schema();
  RawSeries out;
  out.names = schema;
  out.dates.resize(n);
  std::iota(out.dates.begin(), out.dates.end(), config.start_date);
  out.columns.assign(schema.size(), std::vector<double>(n));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  auto& open = out.columns[0];
  auto& close = out.columns[1];
  auto& high = out.columns[2];
  auto& low = out.columns[3];
  const double mu = config.drift - 0.5 * config.volatility * config.volatility;
  double prev = config.initial_price;
  for (std::size_t t = 0; t < n; ++t) {
    open[t] = prev;
    close[t] = prev * std::exp(mu + config.volatility * normal(rng));
    high[t] = std::max(open[t], close[t]) * (1.0 + config.range_noise * std::abs(normal(rng)));
    low[t] = std::min(open[t], close[t]) / (1.0 + config.range_noise * std::abs(normal(rng)));
    prev = close[t];
  }

  // Every fourth auxiliary column carries no price signal.
  const double noise_scale = config.aux_noise * config.initial_price;
  for (std::size_t j = 4; j < schema.size(); ++j) {
    const std::size_t k = j - 4;
    const double a = (k % 4 == 3) ? 0.0 : config.aux_correlation * (0.5 + 0.25 * double(k % 4));
    auto& col = out.columns[j];
    for (std::size_t t = 0; t < n; ++t) {
      col[t] = a * close[t] + noise_scale * (1.0 - uniform(rng));
    }
  }
  return out;
}

}  // namespace walkforge::ingest
