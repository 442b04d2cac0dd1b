#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "walkforge/matrix.hpp"

namespace walkforge::forest {

struct ForestConfig {
  std::size_t n_trees = 100;
  std::size_t max_depth = 0;  // 0 = unlimited
  std::size_t min_samples_leaf = 5;
  std::size_t mtry = 0;  // 0 = ceil(p / 3)
  std::uint64_t seed = 0;
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // x[feature] <= threshold goes left
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;  // mean target of the node's samples
  std::uint64_t samples = 0;
  double impurity_decrease = 0.0;  // var(node) - weighted var(children)

  bool is_leaf() const noexcept { return feature < 0; }
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::uint64_t n_samples = 0;  // bootstrap sample size

  double predict(std::span<const double> x) const;
};

struct Forest {
  std::size_t n_features = 0;
  std::vector<RegressionTree> trees;
  bool degenerate = false;  // constant target: single-leaf trees, zero importances
};

struct SplitCandidate {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double weighted_variance = 0.0;  // (SSE_left + SSE_right) / n_node
  std::size_t n_left = 0;
};

/// Exact CART search over midpoints between consecutive distinct values of
/// each candidate feature. Both children must hold at least min_leaf samples.
SplitCandidate best_split(const Matrix& x, std::span<const double> y,
                          std::span<const std::size_t> samples,
                          std::span<const std::size_t> features, std::size_t min_leaf);

Forest fit_forest(const Matrix& x, std::span<const double> y, const ForestConfig& config);

double predict(const Forest& forest, std::span<const double> x);

struct ImportanceRanking {
  std::vector<double> importance;  // sums to 1 unless degenerate
  std::vector<std::size_t> order;  // descending importance, ties by index
  bool degenerate = false;
};

ImportanceRanking importances(const Forest& forest);

/// Orders a raw importance vector; does not renormalize.
ImportanceRanking rank(std::vector<double> importance);

std::vector<std::size_t> top_k(const ImportanceRanking& ranking, std::size_t k);
std::vector<std::string> top_k(const ImportanceRanking& ranking,
                               std::span<const std::string> names, std::size_t k);

/// `feature,importance` rows in ranking order; limit 0 writes every feature.
void write_importance_csv(const ImportanceRanking& ranking, std::span<const std::string> names,
                          std::ostream& out, std::size_t limit = 0);

void save(const Forest& forest, std::ostream& out);
Forest load(std::istream& in);

}  // namespace walkforge::forest
