#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "walkforge/matrix.hpp"
#include "walkforge/range.hpp"

namespace walkforge::splitter {

struct Batch {
  IndexRange train;
  IndexRange test;

  friend bool operator==(const Batch&, const Batch&) = default;
};

struct WalkForwardPlan {
  std::size_t train_len = 500;
  std::size_t test_len = 100;
  std::size_t stride = 100;
  std::vector<Batch> batches;
};

/// Batch k trains on [k*stride, k*stride + train_len) and tests on the
/// following test_len rows; batches whose test range would overrun n are
/// dropped.
WalkForwardPlan make_batches(std::size_t n, std::size_t train_len = 500,
                             std::size_t test_len = 100, std::size_t stride = 100);

/// Lookback samples for sequence models. Sample i holds rows
/// [t - lookback + 1, t] of the feature matrix and targets close[t + 1].
struct SampleSet {
  std::size_t lookback = 0;
  std::size_t n_features = 0;
  std::vector<double> inputs;  // samples x lookback x features, row-major
  std::vector<double> targets;
  std::vector<std::size_t> rows;  // t for each sample (target row is t + 1)

  std::size_t size() const noexcept { return targets.size(); }
  std::span<const double> sample(std::size_t i) const {
    return {inputs.data() + i * lookback * n_features, lookback * n_features};
  }
};

/// One sample per t in [range.begin + lookback - 1, range.end - 1).
SampleSet make_windows(const Matrix& features, std::span<const double> close_scaled,
                       IndexRange range, std::size_t lookback);

/// Samples whose targets are exactly the rows of `targets`. Inputs may reach
/// back before targets.begin; they never reach forward.
SampleSet make_target_windows(const Matrix& features, std::span<const double> close_scaled,
                              IndexRange targets, std::size_t lookback);

/// `{"batches":[{"train":[a,b],"test":[b,c]},...]}` plus the plan lengths.
std::string plan_to_json(const WalkForwardPlan& plan);
WalkForwardPlan plan_from_json(std::string_view text);

}  // namespace walkforge::splitter
