#include "vidssm/errors.hpp"
#include "vidssm/reduced_dynamics.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace vidssm {

namespace {

double horner_rho2(const Eigen::VectorXd& c, double rho) {
  const double r2 = rho * rho;
  double v = 0.0;
  for (Eigen::Index k = c.size() - 1; k >= 0; --k) v = v * r2 + c(k);
  return v;
}

}  // namespace

double PolarPair::gamma_at(double rho) const { return horner_rho2(gamma, rho); }
double PolarPair::omega_at(double rho) const { return horner_rho2(omega, rho); }

PolarModel to_polar(const NormalFormModel& nf) {
  if (nf.d != 2) throw InputError("polar form is implemented for two-dimensional normal forms");
  if (nf.partner.size() != 2 || nf.partner[0] != 1 || !(nf.lambda(0).imag() != 0.0))
    throw InputError("polar form needs an oscillatory (complex-conjugate) eigenvalue pair");
  const int terms = (nf.order - 1) / 2 + 1;
  PolarPair pair;
  pair.gamma = Eigen::VectorXd::Zero(terms);
  pair.omega = Eigen::VectorXd::Zero(terms);
  pair.gamma(0) = nf.lambda(0).real();
  pair.omega(0) = nf.lambda(0).imag();
  const double scale = std::abs(nf.lambda(0));
  for (int k = nf.d; k < nf.basis.size(); ++k) {
    const Complex c = nf.N(0, k);
    if (std::abs(c) <= 1e-14 * scale) continue;
    const int a = nf.basis[k](0);
    const int b = nf.basis[k](1);
    if (a != b + 1)
      throw ResonanceError("normal form term " + nf.basis.describe(k) +
                           " depends on the phase; no polar reduction");
    pair.gamma(b) = c.real();
    pair.omega(b) = c.imag();
  }
  PolarModel out;
  out.pairs.push_back(pair);
  return out;
}

NormalFormModel normal_form_from_polar(const PolarPair& pair) {
  if (pair.gamma.size() < 1 || pair.gamma.size() != pair.omega.size())
    throw InputError("polar coefficients must be non-empty and of equal length");
  if (pair.omega(0) == 0.0) throw InputError("polar pair needs a nonzero linear frequency");
  NormalFormModel nf;
  nf.d = 2;
  nf.order = 2 * static_cast<int>(pair.gamma.size() - 1) + 1;
  nf.basis = MultiIndexBasis(2, 1, nf.order);
  const double s = 1.0 / std::sqrt(2.0);
  nf.W.resize(2, 2);
  nf.W << Complex(s, 0.0), Complex(s, 0.0), Complex(0.0, -s), Complex(0.0, s);
  nf.lambda.resize(2);
  nf.lambda << Complex(pair.gamma(0), pair.omega(0)), Complex(pair.gamma(0), -pair.omega(0));
  const int K = nf.basis.size();
  nf.H = Eigen::MatrixXcd::Zero(2, K);
  nf.N = Eigen::MatrixXcd::Zero(2, K);
  nf.T = Eigen::MatrixXcd::Zero(2, K);
  nf.H.leftCols(2) = nf.W.inverse();
  nf.T.leftCols(2) = nf.W;
  nf.N.leftCols(2) = nf.lambda.asDiagonal();
  for (Eigen::Index b = 1; b < pair.gamma.size(); ++b) {
    Eigen::VectorXi e(2);
    e << static_cast<int>(b) + 1, static_cast<int>(b);
    nf.N(0, nf.basis.index_of(e)) = Complex(pair.gamma(b), pair.omega(b));
    e << static_cast<int>(b), static_cast<int>(b) + 1;
    nf.N(1, nf.basis.index_of(e)) = Complex(pair.gamma(b), -pair.omega(b));
  }
  nf.partner = {1, 0};
  nf.max_training_amplitude = 0.0;
  return nf;
}

}  // namespace vidssm
