#include "vidssm/reduced_dynamics.hpp"
#include "vidssm/synthetic.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace vidssm;

namespace {

// Positive zeros of gamma(rho) found by sign changes on a fine grid and
// refined by bisection.
std::vector<double> positive_zeros(const PolarPair& p, double rho_max) {
  std::vector<double> roots;
  const int n = 20000;
  double a = 1e-9;
  for (int k = 1; k <= n; ++k) {
    double b = rho_max * k / n;
    if ((p.gamma_at(a) < 0) != (p.gamma_at(b) < 0)) {
      double lo = a, hi = b;
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        ((p.gamma_at(lo) < 0) == (p.gamma_at(mid) < 0) ? lo : hi) = mid;
      }
      roots.push_back(0.5 * (lo + hi));
    }
    a = b;
  }
  return roots;
}

// Zeros of c0 + c1 u + c2 u^2 in u = rho^2, solved in closed form.
std::vector<double> quadratic_rho_roots(double c0, double c1, double c2) {
  const double disc = std::sqrt(c1 * c1 - 4 * c2 * c0);
  std::vector<double> out{std::sqrt((-c1 + disc) / (2 * c2)), std::sqrt((-c1 - disc) / (2 * c2))};
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(Fixtures, ShimmyHasTwoLimitCycles) {
  const PolarPair p = shimmy_fixture();
  const auto roots = positive_zeros(p, 0.6);
  ASSERT_EQ(roots.size(), 2u);
  const auto exact = quadratic_rho_roots(-0.8583, 12.11, -37.71);
  EXPECT_NEAR(roots[0], exact[0], 1e-9);
  EXPECT_NEAR(roots[1], exact[1], 1e-9);
  EXPECT_NEAR(roots[0], 0.325, 5e-4);
  EXPECT_NEAR(roots[1], 0.464, 5e-4);
}

TEST(Fixtures, FlutterOriginIsUnstable) {
  const PolarPair p = flutter_fixture();
  EXPECT_DOUBLE_EQ(p.gamma_at(0.0), 0.4844);
  EXPECT_DOUBLE_EQ(p.omega_at(0.0), 15.90);
}

TEST(Fixtures, FlutterSettlesOnFirstLimitCycle) {
  const PolarPair p = flutter_fixture();
  const double rho_star = positive_zeros(p, 1.0).front();
  const NormalFormModel nf = normal_form_from_polar(p);
  const NormalFormTrajectory tr = advect(nf, Eigen::Vector2cd(0.05, 0.05), 40.0, 1e-3);
  const double rho_end = std::abs(tr.z(0, tr.z.cols() - 1));
  EXPECT_NEAR(rho_end, rho_star, 0.01 * rho_star);
}

TEST(Fixtures, FlagLinearPartIsSaddle) {
  const ReducedModel rm = flag_fixture();
  EXPECT_EQ(rm.r, 9);
  const Eigen::Matrix2d A = rm.linear_part();
  EXPECT_NEAR(A(0, 0), 0.09106, 1e-15);
  EXPECT_NEAR(A(1, 0), -2.741, 1e-15);
  EXPECT_LT(A.determinant(), 0.0);
  EXPECT_NEAR(A.determinant(), -6.395, 1e-3);
  const Eigen::EigenSolver<Eigen::Matrix2d> es(A);
  const auto ev = es.eigenvalues();
  EXPECT_EQ(ev(0).imag(), 0.0);
  EXPECT_EQ(ev(1).imag(), 0.0);
  EXPECT_LT(ev(0).real() * ev(1).real(), 0.0);
}

TEST(Fixtures, FlagFieldHasEveryMonomial) {
  const ReducedModel rm = flag_fixture();
  // Orders 1..9 in two variables: 54 monomials, and the field uses all of them.
  EXPECT_EQ(rm.basis.size(), 54);
  EXPECT_EQ((rm.R.array() != 0.0).count(), 108);
  EXPECT_DOUBLE_EQ(rm.R(1, rm.basis.index_of(Eigen::Vector2i(3, 4))), 58.71);
}

TEST(Fixtures, SloshingIsSoftening) {
  const PolarPair p = sloshing_fixture();
  const BackboneCurve bc = backbone_curves(p, [](double rho) { return rho; }, 2.0, 100, 2.0);
  for (Eigen::Index k = 1; k < bc.omega.size(); ++k) EXPECT_LT(bc.omega(k), bc.omega(k - 1));
  EXPECT_DOUBLE_EQ(p.omega_at(1.0), 7.80 - 0.60);
}

TEST(Fixtures, DoublePendulumSignPattern) {
  const PolarPair p = double_pendulum_fixture();
  EXPECT_LT(p.gamma(0), 0.0);
  EXPECT_GT(p.gamma(1), 0.0);
  EXPECT_LT(p.gamma(2), 0.0);
  EXPECT_GT(p.omega(0), 0.0);
  EXPECT_LT(p.omega(1), 0.0);
  EXPECT_LT(p.omega(2), 0.0);
}

TEST(Fixtures, ShimmyBackboneHasTwoSignChanges) {
  const BackboneCurve bc = backbone_curves(shimmy_fixture(), [](double rho) { return rho; }, 0.6, 601, 0.6);
  int changes = 0;
  for (Eigen::Index k = 2; k < bc.gamma.size(); ++k)
    if ((bc.gamma(k) < 0) != (bc.gamma(k - 1) < 0)) ++changes;
  EXPECT_EQ(changes, 2);
}
