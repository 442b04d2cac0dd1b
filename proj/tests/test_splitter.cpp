#include <random>
#include <set>

#include "helpers.hpp"
#include "walkforge/splitter.hpp"

using namespace walkforge;

namespace {

std::vector<splitter::Batch> enumerate_batches(std::size_t n, std::size_t tr, std::size_t te, std::size_t stride) {
  std::vector<splitter::Batch> out;
  for (std::size_t start = 0;; start += stride) {
    if (start + tr + te > n) break;
    out.push_back({{start, start + tr}, {start + tr, start + tr + te}});
  }
  return out;
}

Matrix numbered_features(std::size_t rows, std::size_t f) {
  Matrix m(rows, f);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < f; ++c) m(r, c) = static_cast<double>(r * 10 + c);
  }
  return m;
}

std::vector<double> numbered_close(std::size_t rows) {
  std::vector<double> v(rows);
  for (std::size_t r = 0; r < rows; ++r) v[r] = 1000.0 + static_cast<double>(r);
  return v;
}

}  // namespace

TEST_CASE("default plan on 1100 rows") {
  const auto plan = splitter::make_batches(1100);
  REQUIRE(plan.batches.size() == 6);
  CHECK(plan.batches.front().train == IndexRange{0, 500});
  CHECK(plan.batches.front().test == IndexRange{500, 600});
  CHECK(plan.batches.back().train == IndexRange{500, 1000});
  CHECK(plan.batches.back().test == IndexRange{1000, 1100});
}

TEST_CASE("minimum lengths") {
  CHECK(splitter::make_batches(600).batches.size() == 1);
  CHECK_ERRC(splitter::make_batches(599), Errc::TooShort);
  CHECK_ERRC(splitter::make_batches(1000, 500, 100, 0), Errc::InvalidConfig);
}

TEST_CASE("plan matches enumeration") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const std::size_t tr = 1 + rng() % 50;
    const std::size_t te = 1 + rng() % 30;
    const std::size_t stride = 1 + rng() % 40;
    const std::size_t n = tr + te + rng() % 300;
    const auto plan = splitter::make_batches(n, tr, te, stride);
    CHECK(plan.batches == enumerate_batches(n, tr, te, stride));
    CHECK(plan.batches.size() == (n - tr - te) / stride + 1);
  }
}

TEST_CASE("tiled test ranges are disjoint and contiguous") {
  const auto plan = splitter::make_batches(1234, 300, 50, 50);
  std::set<std::size_t> seen;
  for (const auto& b : plan.batches) {
    for (auto t = b.test.begin; t < b.test.end; ++t) CHECK(seen.insert(t).second);
  }
  CHECK(*seen.begin() == 300);
  CHECK(*seen.rbegin() - *seen.begin() + 1 == seen.size());
}

TEST_CASE("train windows") {
  const auto f = numbered_features(10, 2);
  const auto c = numbered_close(10);
  const auto s = splitter::make_windows(f, c, {0, 10}, 3);
  REQUIRE(s.size() == 7);
  CHECK(s.rows.front() == 2);
  CHECK(s.targets.front() == c[3]);
  const auto first = s.sample(0);
  CHECK(std::vector<double>(first.begin(), first.end()) == std::vector<double>{0, 1, 10, 11, 20, 21});
  CHECK(s.rows.back() == 8);
  CHECK(s.targets.back() == c[9]);
  CHECK_ERRC(splitter::make_windows(f, c, {0, 3}, 3), Errc::RangeTooShort);
}

TEST_CASE("lookback one is next-row framing") {
  const auto f = numbered_features(6, 1);
  const auto c = numbered_close(6);
  const auto s = splitter::make_windows(f, c, {0, 6}, 1);
  REQUIRE(s.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(s.sample(i)[0] == f(i, 0));
    CHECK(s.targets[i] == c[i + 1]);
  }
}

TEST_CASE("no train sample targets the test range") {
  const auto f = numbered_features(1100, 1);
  const auto c = numbered_close(1100);
  for (const auto& b : splitter::make_batches(1100).batches) {
    const auto s = splitter::make_windows(f, c, b.train, 7);
    for (auto t : s.rows) {
      CHECK(t + 1 < b.test.begin);
      CHECK(t + 1 >= b.train.begin);
      CHECK(t + 1 - 7 + 1 >= b.train.begin);
    }
  }
}

TEST_CASE("test windows cover exactly the test targets") {
  const auto f = numbered_features(700, 1);
  const auto c = numbered_close(700);
  const auto s = splitter::make_target_windows(f, c, {600, 700}, 7);
  REQUIRE(s.size() == 100);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(s.rows[i] + 1 == 600 + i);
    CHECK(s.targets[i] == c[600 + i]);
    CHECK(s.sample(i).back() == f(600 + i - 1, 0));
  }
}

TEST_CASE("plan json round trip") {
  const auto plan = splitter::make_batches(900, 400, 100, 50);
  const auto text = splitter::plan_to_json(plan);
  CHECK(text.find("\"batches\"") != std::string::npos);
  const auto back = splitter::plan_from_json(text);
  CHECK(back.batches == plan.batches);
  CHECK(back.train_len == 400);
  CHECK(back.test_len == 100);
  CHECK(back.stride == 50);
}
