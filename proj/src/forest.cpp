#include "walkforge/forest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <thread>
#include <utility>

#include "walkforge/binary_io.hpp"
#include "walkforge/error.hpp"

namespace walkforge::forest {

namespace {

constexpr std::uint16_t kForestVersion = 1;

// Column-major view of the training matrix so split scans read contiguously.
struct ColumnStore {
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<double> data;

  explicit ColumnStore(const Matrix& x) : n(x.rows()), p(x.cols()), data(x.rows() * x.cols()) {
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < p; ++c) data[c * n + r] = x(r, c);
    }
  }
  double at(std::size_t r, std::size_t c) const noexcept { return data[c * n + r]; }
};

struct NodeStats {
  double mean = 0.0;
  double sse = 0.0;
  bool constant = true;
};

NodeStats node_stats(std::span<const double> y, std::span<const std::size_t> samples) {
  NodeStats s;
  double sum = 0.0;
  for (const auto i : samples) sum += y[i];
  s.mean = sum / static_cast<double>(samples.size());
  const double first = y[samples.front()];
  for (const auto i : samples) {
    const double d = y[i] - s.mean;
    s.sse += d * d;
    if (y[i] != first) s.constant = false;
  }
  return s;
}

template <typename ValueAt>
SplitCandidate search_splits(ValueAt&& value_at, std::span<const double> y,
                             std::span<const std::size_t> samples,
                             std::span<const std::size_t> features, std::size_t min_leaf) {
  const std::size_t m = samples.size();
  SplitCandidate best;
  if (m < 2 * std::max<std::size_t>(min_leaf, 1)) return best;

  // Centre targets on the node mean to keep the running sums well conditioned.
  double mean = 0.0;
  for (const auto i : samples) mean += y[i];
  mean /= static_cast<double>(m);
  double total = 0.0;
  double total_sq = 0.0;
  for (const auto i : samples) {
    const double d = y[i] - mean;
    total += d;
    total_sq += d * d;
  }

  std::vector<std::pair<double, double>> pairs(m);
  for (const auto f : features) {
    for (std::size_t k = 0; k < m; ++k) pairs[k] = {value_at(samples[k], f), y[samples[k]] - mean};
    std::sort(pairs.begin(), pairs.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    if (pairs.front().first == pairs.back().first) continue;

    double left = 0.0;
    double left_sq = 0.0;
    for (std::size_t k = 0; k + 1 < m; ++k) {
      left += pairs[k].second;
      left_sq += pairs[k].second * pairs[k].second;
      const std::size_t n_left = k + 1;
      if (pairs[k].first == pairs[k + 1].first) continue;
      if (n_left < min_leaf || m - n_left < min_leaf) continue;
      const double n_l = static_cast<double>(n_left);
      const double n_r = static_cast<double>(m - n_left);
      const double right = total - left;
      const double right_sq = total_sq - left_sq;
      const double sse = (left_sq - left * left / n_l) + (right_sq - right * right / n_r);
      const double wv = std::max(sse, 0.0) / static_cast<double>(m);
      if (!best.found || wv < best.weighted_variance) {
        best.found = true;
        best.feature = f;
        best.threshold = 0.5 * (pairs[k].first + pairs[k + 1].first);
        // Midpoints of adjacent doubles can round up onto the right value.
        if (best.threshold >= pairs[k + 1].first) best.threshold = pairs[k].first;
        best.weighted_variance = wv;
        best.n_left = n_left;
      }
    }
  }
  return best;
}

class TreeBuilder {
 public:
  TreeBuilder(const ColumnStore& x, std::span<const double> y, const ForestConfig& config,
              std::size_t mtry, std::mt19937_64& rng)
      : x_(x), y_(y), config_(config), mtry_(mtry), rng_(rng), feature_pool_(x.p) {
    std::iota(feature_pool_.begin(), feature_pool_.end(), std::size_t{0});
  }

  RegressionTree build(std::vector<std::size_t> samples) {
    tree_.n_samples = samples.size();
    grow(samples, 0);
    return std::move(tree_);
  }

 private:
  std::int32_t grow(std::vector<std::size_t>& samples, std::size_t depth) {
    const auto id = static_cast<std::int32_t>(tree_.nodes.size());
    const NodeStats stats = node_stats(y_, samples);
    TreeNode node;
    node.value = stats.mean;
    node.samples = samples.size();
    tree_.nodes.push_back(node);

    const bool depth_capped = config_.max_depth != 0 && depth >= config_.max_depth;
    if (stats.constant || depth_capped) return id;

    // Partial Fisher-Yates draws mtry distinct features.
    for (std::size_t k = 0; k < mtry_; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, feature_pool_.size() - 1);
      std::swap(feature_pool_[k], feature_pool_[pick(rng_)]);
    }
    const std::vector<std::size_t> features(feature_pool_.begin(),
                                            feature_pool_.begin() + static_cast<std::ptrdiff_t>(mtry_));
    const auto split = search_splits([&](std::size_t r, std::size_t c) { return x_.at(r, c); }, y_,
                                     samples, features, config_.min_samples_leaf);
    if (!split.found) return id;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    left.reserve(split.n_left);
    right.reserve(samples.size() - split.n_left);
    for (const auto i : samples) {
      (x_.at(i, split.feature) <= split.threshold ? left : right).push_back(i);
    }
    const double node_var = stats.sse / static_cast<double>(samples.size());
    samples.clear();
    samples.shrink_to_fit();

    tree_.nodes[id].feature = static_cast<std::int32_t>(split.feature);
    tree_.nodes[id].threshold = split.threshold;
    tree_.nodes[id].impurity_decrease = std::max(node_var - split.weighted_variance, 0.0);
    const auto l = grow(left, depth + 1);
    const auto r = grow(right, depth + 1);
    tree_.nodes[id].left = l;
    tree_.nodes[id].right = r;
    return id;
  }

  const ColumnStore& x_;
  std::span<const double> y_;
  const ForestConfig& config_;
  std::size_t mtry_;
  std::mt19937_64& rng_;
  std::vector<std::size_t> feature_pool_;
  RegressionTree tree_;
};

}  // namespace

double RegressionTree::predict(std::span<const double> x) const {
  std::size_t id = 0;
  while (!nodes[id].is_leaf()) {
    const auto& node = nodes[id];
    id = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold
                                      ? node.left
                                      : node.right);
  }
  return nodes[id].value;
}

SplitCandidate best_split(const Matrix& x, std::span<const double> y,
                          std::span<const std::size_t> samples,
                          std::span<const std::size_t> features, std::size_t min_leaf) {
  if (samples.empty()) return {};
  return search_splits([&](std::size_t r, std::size_t c) { return x(r, c); }, y, samples, features,
                       min_leaf);
}

Forest fit_forest(const Matrix& x, std::span<const double> y, const ForestConfig& config) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  if (n < 2) throw Error(Errc::TooShort, "forest needs at least 2 samples");
  if (y.size() != n) throw Error(Errc::LengthMismatch, "target length differs from row count");
  if (config.n_trees < 1 || config.min_samples_leaf < 1) {
    throw Error(Errc::InvalidConfig, "n_trees and min_samples_leaf must be >= 1");
  }
  const std::size_t mtry = config.mtry == 0 ? (p + 2) / 3 : config.mtry;
  if (mtry < 1 || mtry > p) throw Error(Errc::InvalidConfig, "mtry must lie in [1, p]");
  for (const double v : x.flat()) {
    if (!std::isfinite(v)) throw Error(Errc::NonFiniteInput, "forest features");
  }
  for (const double v : y) {
    if (!std::isfinite(v)) throw Error(Errc::NonFiniteInput, "forest target");
  }

  Forest forest;
  forest.n_features = p;
  forest.trees.resize(config.n_trees);
  forest.degenerate = std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; });

  const ColumnStore columns(x);
  const auto build_tree = [&](std::size_t t) {
    std::mt19937_64 rng(config.seed + t);
    std::uniform_int_distribution<std::size_t> draw(0, n - 1);
    std::vector<std::size_t> bootstrap(n);
    for (auto& i : bootstrap) i = draw(rng);
    std::sort(bootstrap.begin(), bootstrap.end());
    TreeBuilder builder(columns, y, config, mtry, rng);
    forest.trees[t] = builder.build(std::move(bootstrap));
  };

  // Each tree owns its generator, so any schedule yields the same forest.
  const std::size_t workers =
      std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), config.n_trees);
  if (workers <= 1) {
    for (std::size_t t = 0; t < config.n_trees; ++t) build_tree(t);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t t = w; t < config.n_trees; t += workers) build_tree(t);
      });
    }
  }
  return forest;
}

double predict(const Forest& forest, std::span<const double> x) {
  if (x.size() != forest.n_features) {
    throw Error(Errc::DimensionMismatch, "expected " + std::to_string(forest.n_features) +
                                             " features, got " + std::to_string(x.size()));
  }
  if (forest.trees.empty()) throw Error(Errc::StaleCache, "forest has no trees");
  double sum = 0.0;
  for (const auto& tree : forest.trees) sum += tree.predict(x);
  return sum / static_cast<double>(forest.trees.size());
}

ImportanceRanking rank(std::vector<double> importance) {
  ImportanceRanking ranking;
  ranking.order.resize(importance.size());
  std::iota(ranking.order.begin(), ranking.order.end(), std::size_t{0});
  std::stable_sort(ranking.order.begin(), ranking.order.end(),
                   [&](std::size_t a, std::size_t b) { return importance[a] > importance[b]; });
  ranking.importance = std::move(importance);
  return ranking;
}

ImportanceRanking importances(const Forest& forest) {
  if (forest.trees.empty()) throw Error(Errc::StaleCache, "forest has no trees");
  std::vector<double> total(forest.n_features, 0.0);
  for (const auto& tree : forest.trees) {
    const double n = static_cast<double>(tree.n_samples);
    for (const auto& node : tree.nodes) {
      if (node.is_leaf()) continue;
      total[static_cast<std::size_t>(node.feature)] +=
          static_cast<double>(node.samples) / n * node.impurity_decrease;
    }
  }
  for (auto& v : total) v /= static_cast<double>(forest.trees.size());
  const double sum = std::accumulate(total.begin(), total.end(), 0.0);

  const bool degenerate = forest.degenerate || !(sum > 0.0);
  if (!degenerate) {
    for (auto& v : total) v /= sum;
  } else {
    std::fill(total.begin(), total.end(), 0.0);
  }
  auto ranking = rank(std::move(total));
  ranking.degenerate = degenerate;
  return ranking;
}

std::vector<std::size_t> top_k(const ImportanceRanking& ranking, std::size_t k) {
  if (k > ranking.order.size()) {
    throw Error(Errc::KTooLarge, "k=" + std::to_string(k) + " exceeds " +
                                     std::to_string(ranking.order.size()) + " features");
  }
  return {ranking.order.begin(), ranking.order.begin() + static_cast<std::ptrdiff_t>(k)};
}

std::vector<std::string> top_k(const ImportanceRanking& ranking,
                               std::span<const std::string> names, std::size_t k) {
  if (names.size() != ranking.order.size()) {
    throw Error(Errc::DimensionMismatch, "feature names differ from ranking width");
  }
  std::vector<std::string> out;
  for (const auto i : top_k(ranking, k)) out.push_back(names[i]);
  return out;
}

void write_importance_csv(const ImportanceRanking& ranking, std::span<const std::string> names,
                          std::ostream& out, std::size_t limit) {
  if (names.size() != ranking.order.size()) {
    throw Error(Errc::DimensionMismatch, "feature names differ from ranking width");
  }
  const std::size_t rows = limit == 0 ? ranking.order.size() : std::min(limit, ranking.order.size());
  out << "feature,importance\n";
  char buf[32];
  for (std::size_t k = 0; k < rows; ++k) {
    const auto i = ranking.order[k];
    std::snprintf(buf, sizeof buf, "%.17g", ranking.importance[i]);
    out << names[i] << ',' << buf << '\n';
  }
}

void save(const Forest& forest, std::ostream& out) {
  binio::write_magic(out, "WFRF");
  binio::write<std::uint16_t>(out, kForestVersion);
  binio::write<std::uint64_t>(out, forest.n_features);
  binio::write<std::uint8_t>(out, forest.degenerate ? 1 : 0);
  binio::write<std::uint64_t>(out, forest.trees.size());
  for (const auto& tree : forest.trees) {
    binio::write<std::uint64_t>(out, tree.n_samples);
    binio::write<std::uint64_t>(out, tree.nodes.size());
    for (const auto& node : tree.nodes) {
      binio::write<std::int32_t>(out, node.feature);
      binio::write<double>(out, node.threshold);
      binio::write<std::int32_t>(out, node.left);
      binio::write<std::int32_t>(out, node.right);
      binio::write<double>(out, node.value);
      binio::write<std::uint64_t>(out, node.samples);
      binio::write<double>(out, node.impurity_decrease);
    }
  }
}

Forest load(std::istream& in) {
  binio::expect_magic(in, "WFRF");
  if (binio::read<std::uint16_t>(in) != kForestVersion) {
    throw Error(Errc::BadArtifact, "unsupported forest version");
  }
  Forest forest;
  forest.n_features = binio::read<std::uint64_t>(in);
  forest.degenerate = binio::read<std::uint8_t>(in) != 0;
  forest.trees.resize(binio::read<std::uint64_t>(in));
  for (auto& tree : forest.trees) {
    tree.n_samples = binio::read<std::uint64_t>(in);
    tree.nodes.resize(binio::read<std::uint64_t>(in));
    for (auto& node : tree.nodes) {
      node.feature = binio::read<std::int32_t>(in);
      node.threshold = binio::read<double>(in);
      node.left = binio::read<std::int32_t>(in);
      node.right = binio::read<std::int32_t>(in);
      node.value = binio::read<double>(in);
      node.samples = binio::read<std::uint64_t>(in);
      node.impurity_decrease = binio::read<double>(in);
    }
  }
  return forest;
}

}  // namespace walkforge::forest
