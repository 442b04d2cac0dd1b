#include "walkforge/splitter.hpp"

#include "json.hpp"
#include "walkforge/error.hpp"

namespace walkforge::splitter {

WalkForwardPlan make_batches(std::size_t n, std::size_t train_len, std::size_t test_len,
                             std::size_t stride) {
  if (train_len == 0 || test_len == 0 || stride == 0) {
    throw Error(Errc::InvalidConfig, "train_len, test_len and stride must be positive");
  }
  const std::size_t required = train_len + test_len;
  if (n < required) {
    throw Error(Errc::TooShort, "n=" + std::to_string(n) + ", required=" + std::to_string(required));
  }
  WalkForwardPlan plan{train_len, test_len, stride, {}};
  for (std::size_t start = 0; start + required <= n; start += stride) {
    plan.batches.push_back({{start, start + train_len}, {start + train_len, start + required}});
  }
  return plan;
}

namespace {

SampleSet gather(const Matrix& features, std::span<const double> close_scaled, std::size_t first_t,
                 std::size_t end_t, std::size_t lookback) {
  const std::size_t f = features.cols();
  SampleSet out;
  out.lookback = lookback;
  out.n_features = f;
  const std::size_t m = end_t - first_t;
  out.inputs.reserve(m * lookback * f);
  out.targets.reserve(m);
  out.rows.reserve(m);
  for (std::size_t t = first_t; t < end_t; ++t) {
    for (std::size_t r = t + 1 - lookback; r <= t; ++r) {
      const auto row = features.row(r);
      out.inputs.insert(out.inputs.end(), row.begin(), row.end());
    }
    out.targets.push_back(close_scaled[t + 1]);
    out.rows.push_back(t);
  }
  return out;
}

}  // namespace

SampleSet make_windows(const Matrix& features, std::span<const double> close_scaled,
                       IndexRange range, std::size_t lookback) {
  if (lookback < 1) throw Error(Errc::InvalidConfig, "lookback must be >= 1");
  if (range.size() < lookback + 1) {
    throw Error(Errc::RangeTooShort, "range of " + std::to_string(range.size()) +
                                         " rows cannot hold lookback " + std::to_string(lookback) +
                                         " plus a target");
  }
  if (range.end > features.rows() || range.end > close_scaled.size()) {
    throw Error(Errc::DimensionMismatch, "range exceeds feature rows");
  }
  return gather(features, close_scaled, range.begin + lookback - 1, range.end - 1, lookback);
}

SampleSet make_target_windows(const Matrix& features, std::span<const double> close_scaled,
                              IndexRange targets, std::size_t lookback) {
  if (lookback < 1) throw Error(Errc::InvalidConfig, "lookback must be >= 1");
  if (targets.empty() || targets.begin < lookback) {
    throw Error(Errc::RangeTooShort, "not enough history before the target range");
  }
  if (targets.end > features.rows() || targets.end > close_scaled.size()) {
    throw Error(Errc::DimensionMismatch, "range exceeds feature rows");
  }
  return gather(features, close_scaled, targets.begin - 1, targets.end - 1, lookback);
}

std::string plan_to_json(const WalkForwardPlan& plan) {
  nlohmann::ordered_json j;
  j["train_len"] = plan.train_len;
  j["test_len"] = plan.test_len;
  j["stride"] = plan.stride;
  j["batches"] = nlohmann::ordered_json::array();
  for (const auto& b : plan.batches) {
    nlohmann::ordered_json entry;
    entry["train"] = {b.train.begin, b.train.end};
    entry["test"] = {b.test.begin, b.test.end};
    j["batches"].push_back(entry);
  }
  return j.dump(2);
}

WalkForwardPlan plan_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    WalkForwardPlan plan;
    plan.train_len = j.value("train_len", std::size_t{500});
    plan.test_len = j.value("test_len", std::size_t{100});
    plan.stride = j.value("stride", std::size_t{100});
    for (const auto& b : j.at("batches")) {
      plan.batches.push_back({{b.at("train").at(0).get<std::size_t>(), b.at("train").at(1).get<std::size_t>()},
                              {b.at("test").at(0).get<std::size_t>(), b.at("test").at(1).get<std::size_t>()}});
    }
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::BadArtifact, std::string("plan JSON: ") + e.what());
  }
}

}  // namespace walkforge::splitter
