#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "walkforge/matrix.hpp"

namespace walkforge::baselines {

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
};

/// Least squares with an intercept; `ridge` is added to the diagonal of the
/// centred Gram matrix so collinear columns still give a finite solution.
LinearModel fit_linear(const Matrix& x, std::span<const double> y, double ridge = 1e-8);
double predict_linear(const LinearModel& model, std::span<const double> x);

struct SvrParams {
  double c = 100.0;
  double epsilon = 0.1;
  double gamma = 0.0;  // 0 = 1 / n_features
  double tol = 1e-3;
  std::size_t max_iter = 100000;
  std::uint64_t seed = 0;
};

struct SvrModel {
  Matrix support_vectors;
  std::vector<double> coef;                 // alpha - alpha*, in [-C, C]
  std::vector<std::size_t> support_index;  // training row of each support vector
  double bias = 0.0;
  double gamma = 0.0;
  double c = 0.0;
  double epsilon = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  double max_violation = 0.0;  // KKT gap at exit
};

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma);

/// epsilon-SVR with an RBF kernel, solved in the dual by SMO over the
/// 2n-variable (alpha, alpha*) form. Never throws on the iteration cap:
/// check `converged`.
SvrModel fit_svr(const Matrix& x, std::span<const double> y, const SvrParams& params = {});
double predict_svr(const SvrModel& model, std::span<const double> x);

/// 0.5 b'Kb - y'b + eps * sum|b| for a full-length dual vector b.
double svr_dual_objective(const Matrix& x, std::span<const double> y,
                          std::span<const double> dual, double gamma, double epsilon);

void save(const LinearModel& model, std::ostream& out);
void save(const SvrModel& model, std::ostream& out);
LinearModel load_linear(std::istream& in);
SvrModel load_svr(std::istream& in);

}  // namespace walkforge::baselines
