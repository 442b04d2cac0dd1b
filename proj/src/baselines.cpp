#include "walkforge/baselines.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "walkforge/checkpoint.hpp"
#include "walkforge/error.hpp"

namespace walkforge::baselines {

namespace {

void check_finite(const Matrix& x, std::span<const double> y) {
  for (const double v : x.flat()) {
    if (!std::isfinite(v)) throw Error(Errc::NonFiniteInput, "feature matrix");
  }
  for (const double v : y) {
    if (!std::isfinite(v)) throw Error(Errc::NonFiniteInput, "target vector");
  }
}

}  // namespace

LinearModel fit_linear(const Matrix& x, std::span<const double> y, double ridge) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  if (n < 1) throw Error(Errc::TooShort, "linear fit needs at least one row");
  if (y.size() != n) throw Error(Errc::LengthMismatch, "target length differs from row count");
  check_finite(x, y);

  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajor> xm(x.flat().data(), static_cast<Eigen::Index>(n),
                                      static_cast<Eigen::Index>(p));
  const Eigen::Map<const Eigen::VectorXd> ym(y.data(), static_cast<Eigen::Index>(n));

  const Eigen::RowVectorXd x_mean = xm.colwise().mean();
  const double y_mean = ym.mean();
  const Eigen::MatrixXd xc = xm.rowwise() - x_mean;
  const Eigen::VectorXd yc = ym.array() - y_mean;

  Eigen::MatrixXd gram = xc.transpose() * xc;
  gram.diagonal().array() += ridge;
  const Eigen::VectorXd w = gram.ldlt().solve(xc.transpose() * yc);

  LinearModel model;
  model.weights.assign(w.data(), w.data() + w.size());
  model.bias = y_mean - x_mean.dot(w);
  if (!std::isfinite(model.bias) || !w.allFinite()) {
    throw Error(Errc::NonFiniteInput, "linear solve produced non-finite weights");
  }
  return model;
}

double predict_linear(const LinearModel& model, std::span<const double> x) {
  if (x.size() != model.weights.size()) {
    throw Error(Errc::DimensionMismatch, "expected " + std::to_string(model.weights.size()) +
                                             " inputs, got " + std::to_string(x.size()));
  }
  return std::inner_product(x.begin(), x.end(), model.weights.begin(), model.bias);
}

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
  double d2 = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d2 += (a[k] - b[k]) * (a[k] - b[k]);
  return std::exp(-gamma * d2);
}

SvrModel fit_svr(const Matrix& x, std::span<const double> y, const SvrParams& params) {
  const std::size_t n = x.rows();
  if (n < 2) throw Error(Errc::TooShort, "SVR needs at least two rows");
  if (y.size() != n) throw Error(Errc::LengthMismatch, "target length differs from row count");
  const double gamma = params.gamma > 0.0 ? params.gamma : 1.0 / static_cast<double>(std::max<std::size_t>(x.cols(), 1));
  if (!(params.c > 0.0) || !(params.epsilon > 0.0) || !(params.tol > 0.0)) {
    throw Error(Errc::InvalidConfig, "SVR C, epsilon and tol must be positive");
  }
  check_finite(x, y);

  const double c = params.c;
  Matrix kernel(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    kernel(i, i) = 1.0;
    for (std::size_t j = 0; j < i; ++j) {
      kernel(i, j) = kernel(j, i) = rbf_kernel(x.row(i), x.row(j), gamma);
    }
  }

  // Variables t < n are alpha_t (sign +1), t >= n are alpha*_{t-n} (sign -1).
  const std::size_t l = 2 * n;
  std::vector<double> alpha(l, 0.0);
  std::vector<double> grad(l);
  std::vector<double> sign(l);
  for (std::size_t t = 0; t < l; ++t) {
    sign[t] = t < n ? 1.0 : -1.0;
    grad[t] = t < n ? params.epsilon - y[t] : params.epsilon + y[t - n];
  }
  const auto q = [&](std::size_t a, std::size_t b) {
    return sign[a] * sign[b] * kernel(a % n, b % n);
  };
  const auto in_up = [&](std::size_t t) {
    return sign[t] > 0 ? alpha[t] < c : alpha[t] > 0.0;
  };
  const auto in_low = [&](std::size_t t) {
    return sign[t] > 0 ? alpha[t] > 0.0 : alpha[t] < c;
  };

  // Solves the two-variable subproblem on (i, j); returns false when the
  // pair cannot move.
  const auto update_pair = [&](std::size_t i, std::size_t j) {
    const double old_i = alpha[i];
    const double old_j = alpha[j];
    if (sign[i] != sign[j]) {
      double quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
      if (quad <= 0.0) quad = 1e-12;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = diff; }
      } else {
        if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = -diff; }
      }
      if (diff > 0.0) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = c - diff; }
      } else {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = c + diff; }
      }
    } else {
      double quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
      if (quad <= 0.0) quad = 1e-12;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = sum - c; }
      } else {
        if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = sum; }
      }
      if (sum > c) {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = sum - c; }
      } else {
        if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = sum; }
      }
    }
    const double d_i = alpha[i] - old_i;
    const double d_j = alpha[j] - old_j;
    if (d_i == 0.0 && d_j == 0.0) return false;
    for (std::size_t t = 0; t < l; ++t) grad[t] += q(t, i) * d_i + q(t, j) * d_j;
    return true;
  };

  SvrModel model;
  model.gamma = gamma;
  model.c = c;
  model.epsilon = params.epsilon;
  std::mt19937_64 rng(params.seed);
  std::size_t iter = 0;
  double gap = 0.0;
  for (; iter < params.max_iter; ++iter) {
    // First-order working set: the maximal violating pair.
    double g_max = -std::numeric_limits<double>::infinity();
    double g_min = std::numeric_limits<double>::infinity();
    std::size_t i = l;
    std::size_t j = l;
    for (std::size_t t = 0; t < l; ++t) {
      const double v = -sign[t] * grad[t];
      if (in_up(t) && v > g_max) { g_max = v; i = t; }
      if (in_low(t) && v < g_min) { g_min = v; j = t; }
    }
    gap = (i == l || j == l) ? 0.0 : g_max - g_min;
    if (gap < params.tol) {
      model.converged = true;
      break;
    }
    if (update_pair(i, j)) continue;

    // Stalled pair: sweep the other violators in a seeded order.
    std::vector<std::size_t> candidates;
    for (std::size_t t = 0; t < l; ++t) {
      if (t != i && in_low(t) && g_max - (-sign[t] * grad[t]) >= params.tol) candidates.push_back(t);
    }
    std::shuffle(candidates.begin(), candidates.end(), rng);
    bool moved = false;
    for (const auto t : candidates) {
      if (update_pair(i, t)) {
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  model.iterations = iter;
  model.max_violation = gap;

  // Bias from free variables, else the midpoint of the feasible interval.
  double upper = std::numeric_limits<double>::infinity();
  double lower = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < l; ++t) {
    const double yg = sign[t] * grad[t];
    if (alpha[t] >= c) {
      if (sign[t] < 0) upper = std::min(upper, yg); else lower = std::max(lower, yg);
    } else if (alpha[t] <= 0.0) {
      if (sign[t] > 0) upper = std::min(upper, yg); else lower = std::max(lower, yg);
    } else {
      ++n_free;
      free_sum += yg;
    }
  }
  const double rho = n_free > 0 ? free_sum / static_cast<double>(n_free) : 0.5 * (upper + lower);
  model.bias = -rho;

  std::vector<std::size_t> support;
  for (std::size_t k = 0; k < n; ++k) {
    if (alpha[k] - alpha[k + n] != 0.0) support.push_back(k);
  }
  model.support_vectors = Matrix(support.size(), x.cols());
  for (std::size_t s = 0; s < support.size(); ++s) {
    const auto k = support[s];
    std::copy(x.row(k).begin(), x.row(k).end(), model.support_vectors.row(s).begin());
    model.coef.push_back(alpha[k] - alpha[k + n]);
  }
  model.support_index = std::move(support);
  return model;
}

double predict_svr(const SvrModel& model, std::span<const double> x) {
  if (model.support_vectors.rows() > 0 && x.size() != model.support_vectors.cols()) {
    throw Error(Errc::DimensionMismatch, "expected " + std::to_string(model.support_vectors.cols()) +
                                             " inputs, got " + std::to_string(x.size()));
  }
  double out = model.bias;
  for (std::size_t s = 0; s < model.coef.size(); ++s) {
    out += model.coef[s] * rbf_kernel(model.support_vectors.row(s), x, model.gamma);
  }
  return out;
}

double svr_dual_objective(const Matrix& x, std::span<const double> y,
                          std::span<const double> dual, double gamma, double epsilon) {
  const std::size_t n = x.rows();
  double quad = 0.0;
  double lin = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) quad += dual[i] * dual[j] * rbf_kernel(x.row(i), x.row(j), gamma);
    lin += -y[i] * dual[i] + epsilon * std::abs(dual[i]);
  }
  return 0.5 * quad + lin;
}

void save(const LinearModel& model, std::ostream& out) {
  write_checkpoint_header(out, ModelTag::Linear);
  binio::write<std::uint64_t>(out, model.weights.size());
  binio::write_doubles(out, model.weights);
  binio::write<double>(out, model.bias);
}

void save(const SvrModel& model, std::ostream& out) {
  write_checkpoint_header(out, ModelTag::Svr);
  binio::write<std::uint64_t>(out, model.support_vectors.rows());
  binio::write<std::uint64_t>(out, model.support_vectors.cols());
  binio::write<double>(out, model.gamma);
  binio::write<double>(out, model.c);
  binio::write<double>(out, model.epsilon);
  binio::write<double>(out, model.bias);
  binio::write<std::uint8_t>(out, model.converged ? 1 : 0);
  binio::write<std::uint64_t>(out, model.iterations);
  binio::write<double>(out, model.max_violation);
  binio::write_doubles(out, model.support_vectors.flat());
  binio::write_doubles(out, model.coef);
  for (const auto k : model.support_index) binio::write<std::uint64_t>(out, k);
}

LinearModel load_linear(std::istream& in) {
  if (read_checkpoint_header(in) != ModelTag::Linear) {
    throw Error(Errc::BadArtifact, "checkpoint does not hold a linear model");
  }
  LinearModel model;
  model.weights.resize(binio::read<std::uint64_t>(in));
  binio::read_doubles(in, model.weights);
  model.bias = binio::read<double>(in);
  return model;
}

SvrModel load_svr(std::istream& in) {
  if (read_checkpoint_header(in) != ModelTag::Svr) {
    throw Error(Errc::BadArtifact, "checkpoint does not hold an SVR model");
  }
  SvrModel model;
  const auto rows = binio::read<std::uint64_t>(in);
  const auto cols = binio::read<std::uint64_t>(in);
  model.gamma = binio::read<double>(in);
  model.c = binio::read<double>(in);
  model.epsilon = binio::read<double>(in);
  model.bias = binio::read<double>(in);
  model.converged = binio::read<std::uint8_t>(in) != 0;
  model.iterations = binio::read<std::uint64_t>(in);
  model.max_violation = binio::read<double>(in);
  model.support_vectors = Matrix(rows, cols);
  binio::read_doubles(in, model.support_vectors.flat());
  model.coef.resize(rows);
  binio::read_doubles(in, model.coef);
  model.support_index.resize(rows);
  for (auto& k : model.support_index) k = binio::read<std::uint64_t>(in);
  return model;
}

}  // namespace walkforge::baselines
