#pragma once

#include "vidssm/polynomial.hpp"
#include "vidssm/ssm_geometry.hpp"

#include <Eigen/Core>

#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace vidssm {

using Complex = std::complex<double>;

/// Polynomial vector field xi' = R xi^{1:r} on the manifold.
struct ReducedModel {
  int d = 0;
  int r = 0;
  MultiIndexBasis basis;  // degrees 1..r
  Eigen::MatrixXd R;      // d x basis.size()
  double residual_rms = 0.0;

  Eigen::MatrixXd linear_part() const { return R.leftCols(d); }
};

Eigen::VectorXd evaluate(const ReducedModel& model, const Eigen::VectorXd& xi);

/// Least-squares fit of R to samples xi (d x N per trajectory) and their
/// time derivatives. Throws ConditioningError naming the monomials that
/// make the feature matrix rank deficient.
ReducedModel fit_reduced_dynamics(const std::vector<Eigen::MatrixXd>& xi,
                                  const std::vector<Eigen::MatrixXd>& xi_dot, int r,
                                  double min_samples_per_coefficient = 10.0);

/// Normal form of the reduced dynamics in complex coordinates z:
///   xi = t(z)      = W z + T_{2:n} z^{2:n}
///   z  = t^{-1}(xi) = q + H_{2:n} q^{2:n},   q = W^{-1} xi
///   z' = n(z)      = Lambda z + N_{2:n} z^{2:n}
/// The leading d columns of H, N and T hold W^{-1}, diag(Lambda) and W.
struct NormalFormModel {
  int d = 0;
  int order = 0;
  MultiIndexBasis basis;  // degrees 1..order
  Eigen::MatrixXcd W;
  Eigen::VectorXcd lambda;
  Eigen::MatrixXcd H;
  Eigen::MatrixXcd N;
  Eigen::MatrixXcd T;
  double resonance_tol = 0.1;
  /// Index of the complex-conjugate partner of each coordinate (itself if real).
  std::vector<int> partner;
  /// Largest |z_j| seen on the training data.
  double max_training_amplitude = 0.0;
  double fit_residual = 0.0;
  int iterations = 0;

  Eigen::MatrixXcd inverse_eigenvectors() const { return H.leftCols(d); }
};

struct NormalFormOptions {
  double resonance_tol = 0.1;
  int max_iterations = 200;
  double tolerance = 1e-12;
};

/// True when lambda_row - sum_i k_i lambda_i is within tol |lambda_row|.
bool is_resonant(const Eigen::VectorXcd& lambda, int row, const Eigen::VectorXi& exponent, double tol);

/// Identifies the normal form from the reduced model and the trajectories
/// it was trained on: eigen-decomposition of the linear part, damped
/// Gauss-Newton for (H, N) from the identity start, then least squares for T.
NormalFormModel normal_form(const ReducedModel& model, const std::vector<Eigen::MatrixXd>& xi, int order,
                            const NormalFormOptions& options = {});

Eigen::VectorXcd to_normal_coordinates(const NormalFormModel& nf, const Eigen::VectorXd& xi);
Eigen::VectorXd from_normal_coordinates(const NormalFormModel& nf, const Eigen::VectorXcd& z);
Eigen::VectorXcd normal_form_field(const NormalFormModel& nf, const Eigen::VectorXcd& z);

/// Amplitude-dependent decay rate and frequency of one oscillatory pair:
/// rho'/rho = gamma(rho), theta' = omega(rho), both polynomials in rho^2
/// with coefficient k multiplying rho^(2k).
struct PolarPair {
  Eigen::VectorXd gamma;
  Eigen::VectorXd omega;

  double gamma_at(double rho) const;
  double omega_at(double rho) const;
};

struct PolarModel {
  std::vector<PolarPair> pairs;
};

/// Polar reduction of a two-dimensional oscillatory normal form. Throws
/// ResonanceError when N carries phase-dependent terms and InputError for
/// non-oscillatory or higher-dimensional models.
PolarModel to_polar(const NormalFormModel& nf);

/// A two-dimensional normal form whose dynamics realize `pair`
/// (z' = z (gamma(|z|) + i omega(|z|))), with the identity transformations
/// on unit-norm eigenvectors (1, -i)/sqrt(2).
NormalFormModel normal_form_from_polar(const PolarPair& pair);

/// Largest |g . v(t(z))| over 256 equispaced phases, z = (rho e^{i th}, rho e^{-i th}).
double amplitude_map(const ManifoldModel& mm, const NormalFormModel& nf, const Eigen::VectorXd& g,
                     double rho);

struct BackboneCurve {
  Eigen::VectorXd rho;
  Eigen::VectorXd gamma;
  Eigen::VectorXd omega;
  Eigen::VectorXd amplitude;
  bool extrapolated = false;
};

/// Tabulates gamma, omega and the amplitude on `samples` points of
/// [0, rho_max] (a single row when rho_max is 0). `extrapolated` is set
/// when rho_max exceeds `trained_rho`.
BackboneCurve backbone_curves(const PolarPair& pair, const std::function<double(double)>& amplitude,
                              double rho_max, int samples, double trained_rho);

struct Trajectory {
  Eigen::VectorXd times;
  Eigen::MatrixXd states;  // d x K
};

struct NormalFormTrajectory {
  Eigen::VectorXd times;
  Eigen::MatrixXcd z;   // d x K
  Eigen::MatrixXd xi;   // d x K
};

/// Fixed-step RK4 integration over [0, t_span].
Trajectory advect(const ReducedModel& model, const Eigen::VectorXd& xi0, double t_span, double dt,
                  double divergence_bound = 1e6);
NormalFormTrajectory advect(const NormalFormModel& nf, const Eigen::VectorXcd& z0, double t_span,
                            double dt, double divergence_bound = 1e6);

struct Prediction {
  Eigen::VectorXd times;
  Eigen::MatrixXd y;  // n x K
  std::vector<std::string> warnings;
};

/// Predicts observables from one initial embedded vector y0:
/// xi0 = V^T y0, z0 = t^{-1}(xi0), advect, y = v(t(z)).
Prediction predict_observable(const ManifoldModel& mm, const NormalFormModel& nf,
                              const Eigen::VectorXd& y0, double t_span, double dt);

}  // namespace vidssm
