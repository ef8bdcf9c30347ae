#pragma once

#include "vidssm/embedding.hpp"
#include "vidssm/polynomial.hpp"

#include <Eigen/Core>

#include <vector>

namespace vidssm {

/// Graph-style polynomial chart of a d-dimensional manifold in R^n:
/// y = V xi + M_{2:m} xi^{2:m}, with xi = V^T y.
struct ManifoldModel {
  int n = 0;
  int d = 0;
  int m = 0;
  MultiIndexBasis basis;  // degrees 1..m
  Eigen::MatrixXd V;      // n x d, orthonormal columns
  Eigen::MatrixXd M;      // n x basis.size(); leading d columns equal V
  double training_ermse = 0.0;
  std::vector<double> cost_history;  // cost after initialization and each iteration

  Eigen::MatrixXd nonlinear_coefficients() const { return M.rightCols(M.cols() - d); }
};

/// Reduced coordinates xi = V^T y (vector or column-wise batch).
template <typename Derived>
Eigen::Matrix<double, Eigen::Dynamic, Derived::ColsAtCompileTime> project(
    const Eigen::MatrixXd& V, const Eigen::MatrixBase<Derived>& y) {
  return V.transpose() * y;
}

/// Evaluates the chart v(xi) at one point or at every column of `xi`.
Eigen::VectorXd parameterize(const ManifoldModel& model, const Eigen::VectorXd& xi);
Eigen::MatrixXd parameterize_batch(const ManifoldModel& model, const Eigen::MatrixXd& xi);

struct ManifoldFitOptions {
  int max_iterations = 500;
  double relative_tolerance = 1e-9;
  double min_samples_per_coefficient = 10.0;
};

/// Minimizes sum_j |y_j - M (V^T y_j)^{1:m}|^2 subject to V^T V = I and
/// V^T M_{2:m} = 0. V starts from leading left singular vectors of the
/// stacked snapshots; the iteration alternates the exact constrained least
/// squares solve for M with a QR-retracted, backtracked gradient step on V.
/// Each trajectory is n x N_i (one sample per column) and every sample
/// carries the same weight.
ManifoldModel fit_manifold(const std::vector<Eigen::MatrixXd>& trajectories, int d, int m,
                           const ManifoldFitOptions& options = {});
ManifoldModel fit_manifold(const std::vector<EmbeddedSeries>& trajectories, int d, int m,
                           const ManifoldFitOptions& options = {});

/// Cost and gradient of the reduced (M eliminated) objective at an
/// orthonormal V. The gradient is exact along directions tangent to the
/// orthonormality constraint. Exposed for verification.
struct ManifoldObjective {
  double cost = 0.0;
  Eigen::MatrixXd gradient;       // n x d
  Eigen::MatrixXd nonlinear;      // optimal M_{2:m} for this V
};
ManifoldObjective manifold_objective(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& V, int m,
                                     bool with_gradient = true);

}  // namespace vidssm
