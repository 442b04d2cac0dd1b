#include <cmath>
#include <limits>
#include <sstream>

#include "helpers.hpp"
#include "walkforge/ingest.hpp"

using namespace walkforge;
using ingest::CleanPolicy;
using ingest::FillMode;

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

TEST_CASE("schema has 23 columns led by OCHL") {
  const auto& s = ingest::default_schema();
  REQUIRE(s.size() == 23);
  CHECK(s[0] == "open");
  CHECK(s[1] == "close");
  CHECK(s[2] == "high");
  CHECK(s[3] == "low");
}

TEST_CASE("dates round-trip through ISO text") {
  CHECK(ingest::parse_date("1970-01-01") == 0);
  CHECK(ingest::parse_date("2013-01-01") == 15706);
  CHECK(ingest::format_date(15706) == "2013-01-01");
  for (std::int64_t d : {-1000, 0, 11016, 18993, 20000}) {
    CHECK(ingest::parse_date(ingest::format_date(d)) == d);
  }
  CHECK_ERRC(ingest::parse_date("2013-02-30"), Errc::ParseError);
  CHECK_ERRC(ingest::parse_date("13-01-01"), Errc::ParseError);
}

TEST_CASE("csv reader validates structure") {
  const auto header = [] {
    std::string h = "date";
    for (const auto& n : ingest::default_schema()) h += "," + n;
    return h + "\n";
  };
  const auto row = [](const char* date, double v) {
    std::string r = date;
    for (std::size_t i = 0; i < 23; ++i) r += "," + std::to_string(v);
    return r + "\n";
  };

  SUBCASE("valid rows are sorted by date") {
    std::istringstream in(header() + row("2020-01-02", 2) + row("2020-01-01", 1));
    const auto s = ingest::read_csv(in);
    REQUIRE(s.size() == 2);
    CHECK(s.dates[0] < s.dates[1]);
    CHECK(s.column("close")[0] == 1.0);
  }
  SUBCASE("empty input") {
    std::istringstream in("");
    CHECK_ERRC(ingest::read_csv(in), Errc::EmptyFile);
  }
  SUBCASE("missing column") {
    std::istringstream in("date,open,close\n2020-01-01,1,1\n");
    CHECK_ERRC(ingest::read_csv(in), Errc::MissingColumn);
  }
  SUBCASE("duplicate date") {
    std::istringstream in(header() + row("2020-01-01", 1) + row("2020-01-01", 2));
    CHECK_ERRC(ingest::read_csv(in), Errc::DuplicateDate);
  }
  SUBCASE("short row") {
    std::istringstream in(header() + "2020-01-01,1,2\n");
    CHECK_ERRC(ingest::read_csv(in), Errc::ParseError);
  }
  SUBCASE("unparsable number becomes a gap") {
    std::string bad = "2020-01-02";
    for (std::size_t i = 0; i < 23; ++i) bad += i == 1 ? ",n/a" : ",1";
    std::istringstream in(header() + row("2020-01-01", 1) + bad + "\n");
    const auto s = ingest::read_csv(in);
    CHECK(std::isnan(s.column("close")[1]));
  }
}

TEST_CASE("forward fill within the cap") {
  auto s = testing::flat_series(testing::consecutive_dates(3), {1.0, kNaN, 3.0});
  const auto out = ingest::clean(s, {FillMode::ForwardFill, 1});
  CHECK(out.column("close") == std::vector<double>{1.0, 1.0, 3.0});
}

TEST_CASE("gap beyond the cap is rejected") {
  auto s = testing::flat_series(testing::consecutive_dates(4), {1.0, kNaN, kNaN, 4.0});
  CHECK_ERRC(ingest::clean(s, {FillMode::ForwardFill, 1}), Errc::GapTooLong);
}

TEST_CASE("missing calendar day is inserted and filled") {
  auto s = testing::flat_series({15706, 15708}, {1.0, 3.0});
  const auto out = ingest::clean(s, {FillMode::ForwardFill, 1});
  REQUIRE(out.size() == 3);
  CHECK(out.dates == std::vector<std::int64_t>{15706, 15707, 15708});
  CHECK(out.column("close") == std::vector<double>{1.0, 1.0, 3.0});
}

TEST_CASE("leading gap and reject mode") {
  auto lead = testing::flat_series(testing::consecutive_dates(3), {kNaN, 2.0, 3.0});
  CHECK_ERRC(ingest::clean(lead), Errc::LeadingNaN);
  auto gap = testing::flat_series(testing::consecutive_dates(3), {1.0, kNaN, 3.0});
  CHECK_ERRC(ingest::clean(gap, {FillMode::Reject, 3}), Errc::GapTooLong);
}

TEST_CASE("inconsistent OHLC is rejected") {
  auto s = testing::flat_series(testing::consecutive_dates(2), {1.0, 2.0});
  s.columns[2][1] = 1.5;  // high below close
  CHECK_ERRC(ingest::clean(s), Errc::InvalidOhlc);
}

TEST_CASE("clean is idempotent") {
  auto s = testing::flat_series({15706, 15707, 15709, 15710, 15713},
                                {1.0, kNaN, 2.0, 5.0, 4.0});
  const CleanPolicy p{FillMode::ForwardFill, 3};
  const auto once = ingest::clean(s, p);
  CHECK(ingest::clean(once, p) == once);
}

TEST_CASE("csv round trip is bit exact") {
  const auto s = ingest::clean(ingest::synthesize(300, 11));
  std::stringstream buf;
  ingest::write_csv(s, buf);
  const auto back = ingest::read_csv(buf);
  CHECK(back == s);
}

TEST_CASE("synthesize is deterministic") {
  const auto a = ingest::synthesize(10, 7);
  const auto b = ingest::synthesize(10, 7);
  CHECK(a == b);
  std::stringstream sa, sb;
  ingest::write_csv(a, sa);
  ingest::write_csv(b, sb);
  CHECK(sa.str() == sb.str());
  CHECK_FALSE(ingest::synthesize(10, 8) == a);
}

TEST_CASE("synthesize validates its configuration") {
  ingest::SynthConfig cfg;
  cfg.volatility = 0.0;
  CHECK_ERRC(ingest::synthesize(10, 7, cfg), Errc::InvalidConfig);
  cfg.volatility = -0.1;
  CHECK_ERRC(ingest::synthesize(10, 7, cfg), Errc::InvalidConfig);
}

TEST_CASE("synthetic bars bracket open and close") {
  const auto s = ingest::synthesize(500, 1);
  const auto& open = s.column("open");
  const auto& close = s.column("close");
  const auto& high = s.column("high");
  const auto& low = s.column("low");
  for (std::size_t t = 0; t < s.size(); ++t) {
    CHECK(low[t] <= std::min(open[t], close[t]));
    CHECK(high[t] >= std::max(open[t], close[t]));
    if (t > 0) CHECK(open[t] == close[t - 1]);
  }
  CHECK(ingest::clean(s) == s);
}
