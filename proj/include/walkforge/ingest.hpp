#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace walkforge::ingest {

/// The 23 raw columns in their fixed in-memory order: OCHL, then the 19
/// on-chain and social series.
const std::vector<std::string>& default_schema();

/// Date-indexed table of raw daily series. Dates are days since 1970-01-01.
struct RawSeries {
  std::vector<std::int64_t> dates;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;

  std::size_t size() const noexcept { return dates.size(); }
  std::size_t column_index(std::string_view name) const;
  const std::vector<double>& column(std::string_view name) const {
    return columns[column_index(name)];
  }

  friend bool operator==(const RawSeries&, const RawSeries&) = default;
};

enum class FillMode { ForwardFill, Reject };

struct CleanPolicy {
  FillMode fill = FillMode::ForwardFill;
  std::size_t max_consecutive_fill = 3;
};

/// Parameters of the synthetic generator. The close is a geometric random
/// walk; auxiliary column j is a_j * close + aux_noise * initial_price * u
/// with u ~ U(0, 1].
struct SynthConfig {
  double initial_price = 100.0;
  double drift = 0.0005;
  double volatility = 0.03;
  double range_noise = 0.01;
  double aux_correlation = 1.0;
  double aux_noise = 0.25;
  std::int64_t start_date = 15706;  // 2013-01-01
};

std::int64_t parse_date(std::string_view iso);
std::string format_date(std::int64_t days);

RawSeries read_csv(std::istream& in, const std::vector<std::string>& schema = default_schema());
RawSeries load_csv(const std::filesystem::path& path,
                   const std::vector<std::string>& schema = default_schema());

/// Writes `date,<names...>` with 17 significant digits so that reading the
/// file back reproduces every value bit for bit.
void write_csv(const RawSeries& series, std::ostream& out);
void write_csv(const RawSeries& series, const std::filesystem::path& path);

RawSeries clean(const RawSeries& series, const CleanPolicy& policy = {});

RawSeries synthesize(std::size_t n, std::uint64_t seed, const SynthConfig& config = {});

}  // namespace walkforge::ingest
