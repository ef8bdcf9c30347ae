#include "vidssm/ssm_geometry.hpp"

#include "vidssm/errors.hpp"
#include "vidssm/metrics.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>

namespace vidssm {

namespace {

// Least squares X * Phi ~= target with Phi rows scaled to unit norm first.
Eigen::MatrixXd solve_rows(const Eigen::MatrixXd& Phi, const Eigen::MatrixXd& target) {
  Eigen::VectorXd scale = Phi.rowwise().norm();
  for (Eigen::Index i = 0; i < scale.size(); ++i)
    if (!(scale(i) > 0.0)) scale(i) = 1.0;
  const Eigen::MatrixXd scaled = scale.cwiseInverse().asDiagonal() * Phi;
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled.transpose());
  const Eigen::MatrixXd X = qr.solve(target.transpose());
  return X.transpose() * scale.cwiseInverse().asDiagonal();
}

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& A) {
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(A.rows(), A.cols());
  // Fix column signs so that Q spans A with a positive diagonal in R.
  const Eigen::MatrixXd R = qr.matrixQR().topRows(A.cols()).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
  return Q;
}

}  // namespace

Eigen::VectorXd parameterize(const ManifoldModel& model, const Eigen::VectorXd& xi) {
  if (xi.size() != model.d) throw ShapeError("reduced coordinate has wrong dimension");
  return model.M * monomials(xi, model.basis);
}

Eigen::MatrixXd parameterize_batch(const ManifoldModel& model, const Eigen::MatrixXd& xi) {
  if (xi.rows() != model.d) throw ShapeError("reduced coordinates have wrong dimension");
  return model.M * monomials_batch(xi, model.basis);
}

ManifoldObjective manifold_objective(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& V, int m,
                                     bool with_gradient) {
  const Eigen::Index d = V.cols();
  const Eigen::MatrixXd Xi = V.transpose() * Y;
  const Eigen::MatrixXd off = Y - V * Xi;  // (I - V V^T) Y

  ManifoldObjective out;
  if (m < 2) {
    out.cost = off.squaredNorm();
    out.nonlinear = Eigen::MatrixXd::Zero(Y.rows(), 0);
    if (with_gradient) out.gradient = -2.0 * Y * Xi.transpose();
    return out;
  }

  const MultiIndexBasis nl(static_cast<int>(d), 2, m);
  const Eigen::MatrixXd Phi = monomials_batch(Xi, nl);
  Eigen::MatrixXd M2 = solve_rows(Phi, off);
  M2 -= V * (V.transpose() * M2);
  const Eigen::MatrixXd R = off - M2 * Phi;
  out.cost = R.squaredNorm();
  out.nonlinear = M2;
  if (!with_gradient) return out;

  // Envelope-theorem gradient of min_{M2} |(I - V V^T)(Y - M2 Phi(V^T Y))|^2.
  const Eigen::MatrixXd E = Y - M2 * Phi;
  const Eigen::MatrixXd B = M2.transpose() * R;  // K2 x N
  Eigen::MatrixXd rows(Y.cols(), d);
  for (Eigen::Index j = 0; j < Y.cols(); ++j)
    rows.row(j) = B.col(j).transpose() * monomial_jacobian(Xi.col(j), nl);
  out.gradient = -2.0 * (E * Xi.transpose() + Y * rows);
  return out;
}

ManifoldModel fit_manifold(const std::vector<Eigen::MatrixXd>& trajectories, int d, int m,
                           const ManifoldFitOptions& options) {
  if (trajectories.empty()) throw InputError("no training trajectories");
  if (d < 1 || m < 1) throw InputError("manifold dimension and order must be at least 1");
  const Eigen::Index n = trajectories.front().rows();
  Eigen::Index total = 0;
  for (const auto& t : trajectories) {
    if (t.rows() != n) throw ShapeError("trajectories differ in observable dimension");
    total += t.cols();
  }
  if (d > n) throw InputError("manifold dimension exceeds observable dimension");
  const long coeffs = MultiIndexBasis::count(d, 1, m);
  if (static_cast<double>(total) < options.min_samples_per_coefficient * static_cast<double>(coeffs))
    throw InputError("manifold fit needs at least " +
                     std::to_string(static_cast<long>(options.min_samples_per_coefficient * coeffs)) +
                     " samples, got " + std::to_string(total));

  Eigen::MatrixXd Y(n, total);
  {
    Eigen::Index c = 0;
    for (const auto& t : trajectories) {
      Y.middleCols(c, t.cols()) = t;
      c += t.cols();
    }
  }

  const Eigen::BDCSVD<Eigen::MatrixXd> svd(Y, Eigen::ComputeThinU);
  const Eigen::VectorXd& sigma = svd.singularValues();
  if (sigma.size() < d || !(sigma(d - 1) > 1e-12 * sigma(0)))
    throw DegenerateDataError("snapshot matrix has rank below the manifold dimension " +
                              std::to_string(d));

  // Start from the best d-subset of the leading singular vectors: the tangent
  // plane is not always spanned by the d most energetic directions.
  const Eigen::Index pool = std::min<Eigen::Index>(sigma.size(), d + 2);
  Eigen::MatrixXd V = svd.matrixU().leftCols(d);
  double best = manifold_objective(Y, V, m, false).cost;
  if (m >= 2 && pool > d) {
    std::vector<int> pick(d);
    for (int i = 0; i < d; ++i) pick[i] = i;
    while (true) {
      int i = d - 1;
      while (i >= 0 && pick[i] == pool - d + i) --i;
      if (i < 0) break;
      ++pick[i];
      for (int j = i + 1; j < d; ++j) pick[j] = pick[j - 1] + 1;
      if (!(sigma(pick[d - 1]) > 1e-12 * sigma(0))) continue;
      Eigen::MatrixXd cand(n, d);
      for (int j = 0; j < d; ++j) cand.col(j) = svd.matrixU().col(pick[j]);
      const double c = manifold_objective(Y, cand, m, false).cost;
      if (c < best) {
        best = c;
        V = cand;
      }
    }
  }

  ManifoldModel model;
  model.n = static_cast<int>(n);
  model.d = d;
  model.m = m;
  model.basis = MultiIndexBasis(d, 1, m);

  const double floor = 1e-28 * Y.squaredNorm();
  ManifoldObjective obj = manifold_objective(Y, V, m);
  model.cost_history.push_back(obj.cost);
  double step = -1.0;
  for (int it = 0; it < options.max_iterations && obj.cost > floor; ++it) {
    const Eigen::MatrixXd G = obj.gradient - V * (V.transpose() * obj.gradient);
    const double gnorm = G.norm();
    if (!(gnorm > 0.0)) break;
    if (step < 0.0) step = 0.1 / gnorm;

    // Armijo backtracking along the retraction.
    bool accepted = false;
    ManifoldObjective trial;
    Eigen::MatrixXd V_trial;
    for (int bt = 0; bt < 60; ++bt) {
      V_trial = orthonormalize(V - step * G);
      trial = manifold_objective(Y, V_trial, m);
      if (trial.cost <= obj.cost - 1e-4 * step * gnorm * gnorm) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const double rel = (obj.cost - trial.cost) / std::max(obj.cost, std::numeric_limits<double>::min());
    V = V_trial;
    obj = std::move(trial);
    model.cost_history.push_back(obj.cost);
    step *= 2.0;
    if (rel < options.relative_tolerance) break;
  }

  model.V = V;
  model.M.resize(n, model.basis.size());
  model.M.leftCols(d) = V;
  if (m >= 2) model.M.rightCols(model.basis.size() - d) = obj.nonlinear;

  std::vector<Eigen::MatrixXd> recon;
  recon.reserve(trajectories.size());
  for (const auto& t : trajectories) recon.push_back(parameterize_batch(model, V.transpose() * t));
  model.training_ermse = mean_ermse(trajectories, recon);
  return model;
}

ManifoldModel fit_manifold(const std::vector<EmbeddedSeries>& trajectories, int d, int m,
                           const ManifoldFitOptions& options) {
  std::vector<Eigen::MatrixXd> raw;
  raw.reserve(trajectories.size());
  for (const auto& t : trajectories) raw.push_back(t.vectors);
  return fit_manifold(raw, d, m, options);
}

}  // namespace vidssm
