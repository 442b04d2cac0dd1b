#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "helpers.hpp"
#include "oracles.hpp"
#include "walkforge/forest.hpp"

using namespace walkforge;

namespace {

struct Data {
  Matrix x;
  std::vector<double> y;
};

// y = 3 * x1 + sigma * noise with 20 decoy columns.
Data signal_set(std::size_t n, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Data d{Matrix(n, 21), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < 21; ++j) d.x(i, j) = g(rng);
    d.y[i] = 3.0 * d.x(i, 1) + sigma * g(rng);
  }
  return d;
}

std::string serialize(const forest::Forest& f) {
  std::ostringstream out;
  forest::save(f, out);
  return out.str();
}

}  // namespace

TEST_CASE("single feature root split") {
  Data d{Matrix(20, 1), std::vector<double>(20)};
  for (std::size_t i = 0; i < 20; ++i) d.x(i, 0) = d.y[i] = static_cast<double>(i);
  forest::ForestConfig cfg;
  cfg.n_trees = 1;
  cfg.max_depth = 1;
  cfg.seed = 3;
  const auto f = forest::fit_forest(d.x, d.y, cfg);
  REQUIRE(f.trees.size() == 1);
  CHECK(f.trees[0].nodes[0].feature == 0);
  CHECK(f.trees[0].nodes.size() == 3);
  const auto r = forest::importances(f);
  CHECK(r.importance == std::vector<double>{1.0});
}

TEST_CASE("signal feature ranks first") {
  const auto d = signal_set(400, 0.01, 1);
  forest::ForestConfig cfg;
  cfg.seed = 1;
  const auto f = forest::fit_forest(d.x, d.y, cfg);
  const auto r = forest::importances(f);
  CHECK(r.order[0] == 1);
  const double total = std::accumulate(r.importance.begin(), r.importance.end(), 0.0);
  CHECK(std::abs(total - 1.0) < 1e-9);
  for (double v : r.importance) CHECK(v >= 0.0);

  double mean = std::accumulate(d.y.begin(), d.y.end(), 0.0) / static_cast<double>(d.y.size());
  double ss_tot = 0, ss_res = 0;
  for (std::size_t i = 0; i < d.y.size(); ++i) {
    const double p = forest::predict(f, d.x.row(i));
    ss_res += (p - d.y[i]) * (p - d.y[i]);
    ss_tot += (d.y[i] - mean) * (d.y[i] - mean);
  }
  CHECK(1.0 - ss_res / ss_tot > 0.9);
}

TEST_CASE("forest fitting is deterministic") {
  const auto d = signal_set(150, 0.1, 2);
  forest::ForestConfig cfg;
  cfg.n_trees = 20;
  cfg.seed = 5;
  const auto a = forest::fit_forest(d.x, d.y, cfg);
  const auto b = forest::fit_forest(d.x, d.y, cfg);
  CHECK(serialize(a) == serialize(b));
  const auto ia = forest::importances(a);
  const auto ib = forest::importances(b);
  CHECK(ia.importance == ib.importance);
  cfg.seed = 6;
  CHECK(serialize(forest::fit_forest(d.x, d.y, cfg)) != serialize(a));
}

TEST_CASE("importances do not depend on tree order") {
  const auto d = signal_set(120, 0.5, 3);
  forest::ForestConfig cfg;
  cfg.n_trees = 15;
  cfg.seed = 9;
  auto f = forest::fit_forest(d.x, d.y, cfg);
  const auto a = forest::importances(f);
  std::reverse(f.trees.begin(), f.trees.end());
  const auto b = forest::importances(f);
  for (std::size_t j = 0; j < a.importance.size(); ++j) {
    CHECK(a.importance[j] == doctest::Approx(b.importance[j]).epsilon(1e-12));
  }
  CHECK(a.order == b.order);
}

TEST_CASE("shuffled decoy never takes the top spot") {
  auto d = signal_set(300, 0.1, 4);
  std::mt19937_64 rng(44);
  std::vector<double> col = d.x.column(7);
  std::shuffle(col.begin(), col.end(), rng);
  for (std::size_t i = 0; i < col.size(); ++i) d.x(i, 7) = col[i];
  forest::ForestConfig cfg;
  cfg.n_trees = 30;
  cfg.seed = 4;
  const auto r = forest::importances(forest::fit_forest(d.x, d.y, cfg));
  CHECK(r.order[0] == 1);
}

TEST_CASE("constant target is degenerate") {
  Matrix x(30, 3);
  std::mt19937_64 rng(1);
  for (auto& v : x.flat()) v = std::uniform_real_distribution<double>(0, 1)(rng);
  const std::vector<double> y(30, 2.5);
  forest::ForestConfig cfg;
  cfg.n_trees = 5;
  cfg.seed = 1;
  const auto f = forest::fit_forest(x, y, cfg);
  CHECK(f.degenerate);
  for (const auto& t : f.trees) CHECK(t.nodes.size() == 1);
  const auto r = forest::importances(f);
  CHECK(r.degenerate);
  CHECK(r.importance == std::vector<double>(3, 0.0));
  CHECK(forest::predict(f, x.row(0)) == 2.5);
}

TEST_CASE("prediction is the mean of trees") {
  forest::Forest f;
  f.n_features = 2;
  forest::RegressionTree a, b;
  a.nodes.push_back({});
  a.nodes[0].value = 1.0;
  b.nodes.push_back({});
  b.nodes[0].value = 3.0;
  f.trees = {a};
  const std::vector<double> x{0.0, 0.0};
  CHECK(forest::predict(f, x) == 1.0);
  f.trees.push_back(b);
  CHECK(forest::predict(f, x) == 2.0);
  const std::vector<double> wrong{0.0};
  CHECK_ERRC(forest::predict(f, wrong), Errc::DimensionMismatch);
}

TEST_CASE("ranking and top-k") {
  const auto r = forest::rank({0.5, 0.3, 0.2});
  CHECK(forest::top_k(r, 2) == std::vector<std::size_t>{0, 1});
  const auto tie = forest::rank({0.25, 0.25, 0.25, 0.25});
  CHECK(forest::top_k(tie, 3) == std::vector<std::size_t>{0, 1, 2});
  const auto mixed = forest::rank({0.1, 0.4, 0.1, 0.4});
  CHECK(mixed.order == std::vector<std::size_t>{1, 3, 0, 2});
  const std::vector<std::string> names{"a", "b", "c", "d"};
  CHECK(forest::top_k(mixed, names, 2) == std::vector<std::string>{"b", "d"});
  CHECK_ERRC(forest::top_k(mixed, 5), Errc::KTooLarge);
}

TEST_CASE("importance csv") {
  const auto r = forest::rank({0.2, 0.5, 0.3});
  const std::vector<std::string> names{"a", "b", "c"};
  std::ostringstream all, top;
  forest::write_importance_csv(r, names, all);
  forest::write_importance_csv(r, names, top, 2);
  const auto a = all.str();
  const auto t = top.str();
  CHECK(a.rfind("feature,importance\nb,", 0) == 0);
  CHECK(std::count(a.begin(), a.end(), '\n') == 4);
  CHECK(std::count(t.begin(), t.end(), '\n') == 3);
}

TEST_CASE("best split is optimal on small nodes") {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> level(0, 5);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 11);
    const std::size_t p = 1 + static_cast<std::size_t>(trial % 3);
    const std::size_t min_leaf = 1 + static_cast<std::size_t>(trial % 3);
    Matrix x(n, p);
    std::vector<double> y(n);
    std::vector<std::vector<double>> rows(n, std::vector<double>(p));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < p; ++j) rows[i][j] = x(i, j) = level(rng);  // ties on purpose
      y[i] = g(rng);
    }
    std::vector<std::size_t> samples(n), features(p);
    std::iota(samples.begin(), samples.end(), 0);
    std::iota(features.begin(), features.end(), 0);
    const auto got = forest::best_split(x, y, samples, features, min_leaf);
    const auto want = oracle::exhaustive_split(rows, y, min_leaf);
    CAPTURE(trial);
    REQUIRE(got.found == want.found);
    if (!got.found) continue;
    CHECK(got.weighted_variance == doctest::Approx(want.weighted_variance).epsilon(1e-9));
    // The returned cut must realize the reported value.
    std::vector<std::vector<double>> one(n, std::vector<double>(1));
    std::size_t left = 0;
    for (std::size_t i = 0; i < n; ++i) left += x(i, got.feature) <= got.threshold ? 1 : 0;
    CHECK(left == got.n_left);
    CHECK(left >= min_leaf);
    CHECK(n - left >= min_leaf);
  }
}

TEST_CASE("forest binary round trip") {
  const auto d = signal_set(80, 0.1, 6);
  forest::ForestConfig cfg;
  cfg.n_trees = 4;
  cfg.seed = 2;
  const auto f = forest::fit_forest(d.x, d.y, cfg);
  std::stringstream buf;
  forest::save(f, buf);
  const auto back = forest::load(buf);
  CHECK(serialize(back) == serialize(f));
  for (std::size_t i = 0; i < 10; ++i) CHECK(forest::predict(back, d.x.row(i)) == forest::predict(f, d.x.row(i)));
}
