#include "vidssm/reduced_dynamics.hpp"

#include "vidssm/errors.hpp"
#include "vidssm/integrate.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

namespace vidssm {

Eigen::VectorXd evaluate(const ReducedModel& model, const Eigen::VectorXd& xi) {
  if (xi.size() != model.d) throw ShapeError("state dimension differs from the reduced model");
  return model.R * monomials(xi, model.basis);
}

ReducedModel fit_reduced_dynamics(const std::vector<Eigen::MatrixXd>& xi,
                                  const std::vector<Eigen::MatrixXd>& xi_dot, int r,
                                  double min_samples_per_coefficient) {
  if (xi.empty() || xi.size() != xi_dot.size())
    throw InputError("need matching, non-empty lists of states and derivatives");
  if (r < 1) throw InputError("dynamics order must be at least 1");
  const Eigen::Index d = xi.front().rows();
  Eigen::Index total = 0;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    if (xi[i].rows() != d || xi_dot[i].rows() != d || xi[i].cols() != xi_dot[i].cols())
      throw ShapeError("state and derivative trajectories differ in shape");
    total += xi[i].cols();
  }

  ReducedModel model;
  model.d = static_cast<int>(d);
  model.r = r;
  model.basis = MultiIndexBasis(model.d, 1, r);
  const Eigen::Index K = model.basis.size();
  if (static_cast<double>(total) < min_samples_per_coefficient * static_cast<double>(K))
    throw InputError("reduced dynamics fit needs at least " +
                     std::to_string(static_cast<long>(min_samples_per_coefficient * K)) +
                     " samples, got " + std::to_string(total));

  Eigen::MatrixXd Phi(K, total);
  Eigen::MatrixXd target(d, total);
  Eigen::Index c = 0;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    Phi.middleCols(c, xi[i].cols()) = monomials_batch(xi[i], model.basis);
    target.middleCols(c, xi[i].cols()) = xi_dot[i];
    c += xi[i].cols();
  }

  Eigen::VectorXd scale = Phi.rowwise().norm();
  for (Eigen::Index k = 0; k < K; ++k)
    if (!(scale(k) > 0.0)) scale(k) = 1.0;
  const Eigen::MatrixXd A = (scale.cwiseInverse().asDiagonal() * Phi).transpose();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-11);
  if (qr.rank() < K) {
    std::string names;
    const auto perm = qr.colsPermutation().indices();
    for (Eigen::Index j = qr.rank(); j < K; ++j) {
      if (!names.empty()) names += ", ";
      names += model.basis.describe(perm(j));
    }
    throw ConditioningError("reduced dynamics features are rank deficient (rank " +
                            std::to_string(qr.rank()) + " of " + std::to_string(K) +
                            "); dependent monomials: " + names);
  }
  const Eigen::MatrixXd X = qr.solve(target.transpose());
  model.R = X.transpose() * scale.cwiseInverse().asDiagonal();
  model.residual_rms =
      std::sqrt((target - model.R * Phi).squaredNorm() / static_cast<double>(target.size()));
  return model;
}

Trajectory advect(const ReducedModel& model, const Eigen::VectorXd& xi0, double t_span, double dt,
                  double divergence_bound) {
  if (!(dt > 0.0) || !(t_span >= 0.0)) throw InputError("need dt > 0 and t_span >= 0");
  if (xi0.size() != model.d) throw ShapeError("initial state has wrong dimension");
  const long steps = std::lround(t_span / dt);
  const auto states = rk4([&](const Eigen::VectorXd& x) { return evaluate(model, x); }, xi0, dt,
                          steps, divergence_bound);
  Trajectory out;
  out.times = Eigen::VectorXd::LinSpaced(steps + 1, 0.0, steps * dt);
  out.states = stack_columns(states);
  return out;
}

NormalFormTrajectory advect(const NormalFormModel& nf, const Eigen::VectorXcd& z0, double t_span,
                            double dt, double divergence_bound) {
  if (!(dt > 0.0) || !(t_span >= 0.0)) throw InputError("need dt > 0 and t_span >= 0");
  if (z0.size() != nf.d) throw ShapeError("initial state has wrong dimension");
  const long steps = std::lround(t_span / dt);
  const auto states = rk4([&](const Eigen::VectorXcd& z) { return normal_form_field(nf, z); }, z0,
                          dt, steps, divergence_bound);
  NormalFormTrajectory out;
  out.times = Eigen::VectorXd::LinSpaced(steps + 1, 0.0, steps * dt);
  out.z = stack_columns(states);
  out.xi.resize(nf.d, out.z.cols());
  for (Eigen::Index k = 0; k < out.z.cols(); ++k) out.xi.col(k) = from_normal_coordinates(nf, out.z.col(k));
  return out;
}

Prediction predict_observable(const ManifoldModel& mm, const NormalFormModel& nf,
                              const Eigen::VectorXd& y0, double t_span, double dt) {
  if (y0.size() != mm.n) throw ShapeError("initial observable vector has wrong dimension");
  if (mm.d != nf.d) throw ShapeError("manifold and normal form dimensions differ");
  Prediction out;
  const Eigen::VectorXd xi0 = project(mm.V, y0);
  const Eigen::VectorXcd z0 = to_normal_coordinates(nf, xi0);
  if (z0.cwiseAbs().maxCoeff() > nf.max_training_amplitude * (1.0 + 1e-9))
    out.warnings.push_back("initial condition |z| = " + std::to_string(z0.cwiseAbs().maxCoeff()) +
                           " exceeds the trained amplitude " +
                           std::to_string(nf.max_training_amplitude) + "; extrapolating");
  const NormalFormTrajectory traj = advect(nf, z0, t_span, dt);
  out.times = traj.times;
  out.y = parameterize_batch(mm, traj.xi);
  return out;
}

double amplitude_map(const ManifoldModel& mm, const NormalFormModel& nf, const Eigen::VectorXd& g,
                     double rho) {
  if (nf.d != 2 || mm.d != 2) throw InputError("amplitude map needs a two-dimensional model");
  if (g.size() != mm.n) throw ShapeError("observable functional has wrong dimension");
  constexpr int kPhases = 256;
  double best = 0.0;
  for (int k = 0; k < kPhases; ++k) {
    const double th = 2.0 * std::numbers::pi * k / kPhases;
    const Complex z1 = std::polar(rho, th);
    const Eigen::Vector2cd z(z1, std::conj(z1));
    best = std::max(best, std::abs(g.dot(parameterize(mm, from_normal_coordinates(nf, z)))));
  }
  return best;
}

BackboneCurve backbone_curves(const PolarPair& pair, const std::function<double(double)>& amplitude,
                              double rho_max, int samples, double trained_rho) {
  if (!(rho_max >= 0.0)) throw InputError("rho_max must be non-negative");
  if (samples < 1) throw InputError("need at least one sample");
  const int count = rho_max == 0.0 ? 1 : std::max(samples, 2);
  BackboneCurve out;
  out.rho = Eigen::VectorXd::LinSpaced(count, 0.0, rho_max);
  out.gamma.resize(count);
  out.omega.resize(count);
  out.amplitude.resize(count);
  for (int i = 0; i < count; ++i) {
    out.gamma(i) = pair.gamma_at(out.rho(i));
    out.omega(i) = pair.omega_at(out.rho(i));
    out.amplitude(i) = amplitude(out.rho(i));
  }
  out.extrapolated = rho_max > trained_rho;
  return out;
}

}  // namespace vidssm
