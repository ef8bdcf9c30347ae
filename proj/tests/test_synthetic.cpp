#include "vidssm/errors.hpp"
#include "vidssm/integrate.hpp"
#include "vidssm/synthetic.hpp"
#include "vidssm/tracker.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace vidssm;

namespace {

Eigen::Matrix4d numerical_jacobian(const DoublePendulumParams& p) {
  Eigen::Matrix4d J;
  const double h = 1e-6;
  for (int j = 0; j < 4; ++j) {
    Eigen::Vector4d e = Eigen::Vector4d::Zero();
    e(j) = h;
    J.col(j) = (dp_derivatives(e, p) - dp_derivatives(-e, p)) / (2 * h);
  }
  return J;
}

std::vector<double> sorted_imag(const Eigen::Vector4cd& ev) {
  std::vector<double> out;
  for (int i = 0; i < 4; ++i)
    if (ev(i).imag() > 0) out.push_back(ev(i).imag());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(DoublePendulum, RestIsEquilibrium) {
  EXPECT_TRUE(dp_derivatives(Eigen::Vector4d::Zero(), DoublePendulumParams{}).isZero(0.0));
}

TEST(DoublePendulum, DefaultsAreValid) {
  EXPECT_NO_THROW(DoublePendulumParams{}.validate());
  DoublePendulumParams bad;
  bad.l2 = -0.1;
  EXPECT_THROW(bad.validate(), InputError);
  bad = DoublePendulumParams{};
  bad.beta1 = -1e-3;
  EXPECT_THROW(bad.validate(), InputError);
}

TEST(DoublePendulum, LinearizationMatchesJacobian) {
  const DoublePendulumParams p;
  EXPECT_LT((dp_linearization(p) - numerical_jacobian(p)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(DoublePendulum, UndampedFrequenciesFromMassAndStiffness) {
  DoublePendulumParams p;
  p.beta1 = p.beta2 = 0.0;
  const auto k = dp_constants(p);
  Eigen::Matrix2d M, S;
  M << 2 * k.A, k.C, k.C, 2 * k.B;
  S << k.D, 0, 0, k.E;
  const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix2d> ges(S, M);
  const Eigen::Vector2d omega = ges.eigenvalues().cwiseSqrt();
  const Eigen::EigenSolver<Eigen::Matrix4d> es(numerical_jacobian(p));
  const auto freq = sorted_imag(es.eigenvalues());
  ASSERT_EQ(freq.size(), 2u);
  EXPECT_NEAR(freq[0], omega(0), 1e-6 * omega(0));
  EXPECT_NEAR(freq[1], omega(1), 1e-6 * omega(1));
}

TEST(DoublePendulum, SlowModeOfDefaultGeometry) {
  const Eigen::EigenSolver<Eigen::Matrix4d> es(dp_linearization(DoublePendulumParams{}));
  const auto freq = sorted_imag(es.eigenvalues());
  EXPECT_NEAR(freq[0], 6.381, 5e-3);
  const Eigen::Vector4d x = dp_slow_mode_state(DoublePendulumParams{}, 0.3);
  EXPECT_NEAR(x.head<2>().cwiseAbs().maxCoeff(), 0.3, 1e-15);
}

TEST(DoublePendulum, EnergyDecaysWithDamping) {
  const DoublePendulumParams p;
  const Eigen::MatrixXd X = simulate_double_pendulum(p, Eigen::Vector4d(0.6, -0.4, 0.0, 1.0), 1e-3, 5000);
  double prev = dp_energy(X.col(0), p);
  for (Eigen::Index k = 1; k < X.cols(); ++k) {
    const double e = dp_energy(X.col(k), p);
    ASSERT_LE(e, prev + 1e-12) << "step " << k;
    prev = e;
  }
  EXPECT_LT(prev, dp_energy(X.col(0), p));
}

TEST(DoublePendulum, UndampedEnergyDrift) {
  DoublePendulumParams p;
  p.beta1 = p.beta2 = 0.0;
  const Eigen::Vector4d x0(0.3, 0.2, 0.0, 0.0);
  // Ten periods of the slow mode.
  const double t_end = 10.0 * 2.0 * std::numbers::pi / 6.38;
  const long steps = static_cast<long>(t_end / 1e-4);
  const Eigen::MatrixXd X = simulate_double_pendulum(p, x0, 1e-4, steps, 1);
  const double e0 = dp_energy(x0, p);
  double drift = 0.0;
  for (Eigen::Index k = 0; k < X.cols(); ++k) drift = std::max(drift, std::abs(dp_energy(X.col(k), p) - e0));
  EXPECT_LT(drift, 1e-8);
}

TEST(DoublePendulum, TipPositions) {
  const DoublePendulumParams p;
  const auto tip = [&](double a, double b) { return dp_tip_position(Eigen::Vector4d(a, b, 0, 0), p); };
  EXPECT_TRUE(tip(0, 0).isApprox(Eigen::Vector2d(0.0, -0.38), 1e-15));
  const double h = std::numbers::pi / 2;
  EXPECT_NEAR(tip(h, h).x(), 0.38, 1e-15);
  EXPECT_NEAR(tip(h, h).y(), 0.0, 1e-15);
  const Eigen::Vector2d t = tip(std::numbers::pi / 6, std::numbers::pi / 3);
  EXPECT_NEAR(t.x(), 0.1 + 0.09 * std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(t.y(), -0.1 * std::sqrt(3.0) - 0.09, 1e-15);
}

TEST(Hopf, OriginIsFixed) {
  EXPECT_TRUE(hopf_derivatives(Eigen::Vector2d::Zero(), HopfParams{1.0, 2.0, -1.0, 0.5}).isZero(0.0));
}

TEST(Hopf, UnitCircleIsInvariant) {
  const HopfParams hp{1.0, 2.0, -1.0, 0.5};
  for (double th : {0.0, 1.0, 2.5}) {
    const Eigen::Vector2d x(std::cos(th), std::sin(th));
    EXPECT_NEAR(x.dot(hopf_derivatives(x, hp)), 0.0, 1e-15);
  }
}

TEST(Hopf, ConvergesToLimitCycle) {
  const HopfParams hp{1.0, 2.0, -1.0, 0.5};
  const auto traj = rk4([&](const Eigen::Vector2d& x) { return hopf_derivatives(x, hp); },
                        Eigen::Vector2d(0.1, 0.0), 1e-3, 20000);
  EXPECT_NEAR(traj.back().norm(), 1.0, 1e-6);
}

TEST(Integrate, ExponentialDecay) {
  const double dt = 0.01;
  const auto traj = rk4([](const Eigen::VectorXd& x) { return Eigen::VectorXd(-x); },
                        Eigen::VectorXd::Ones(1), dt, 200);
  for (std::size_t k = 0; k < traj.size(); ++k) EXPECT_NEAR(traj[k](0), std::exp(-dt * k), 1e-10);
}

TEST(Integrate, ZeroStepsReturnsInitialState) {
  const auto traj = rk4([](const Eigen::VectorXd& x) { return x; }, Eigen::VectorXd(Eigen::VectorXd::Constant(2, 3.0)), 0.1, 0);
  ASSERT_EQ(traj.size(), 1u);
  EXPECT_EQ(traj[0], Eigen::VectorXd(Eigen::VectorXd::Constant(2, 3.0)));
}

TEST(Integrate, DeterministicAndDivergenceChecked) {
  const auto field = [](const Eigen::VectorXd& x) { return Eigen::VectorXd(x.array().square()); };
  const auto a = rk4(field, Eigen::VectorXd(Eigen::VectorXd::Constant(1, 0.5)), 0.01, 100);
  const auto b = rk4(field, Eigen::VectorXd(Eigen::VectorXd::Constant(1, 0.5)), 0.01, 100);
  EXPECT_EQ(stack_columns(a), stack_columns(b));
  EXPECT_THROW(rk4(field, Eigen::VectorXd(Eigen::VectorXd::Constant(1, 1.0)), 0.01, 1000), DivergenceError);
}

TEST(Render, ConstantTrackGivesIdenticalFrames) {
  const auto r = render_marker_video(std::vector<Pose>(4, Pose{20, 20, 12}), make_marker(11),
                                     Frame(40, 40, 1, 0.1), 30.0);
  for (std::size_t i = 1; i < 4; ++i) EXPECT_TRUE((r.video[i].plane(0) == r.video[0].plane(0)).all());
}

TEST(Render, MovingMarkerChangesOnlyFootprints) {
  const auto r = render_marker_video({Pose{15, 20, 0}, Pose{20, 20, 0}}, make_marker(11),
                                     Frame(40, 40, 1, 0.1), 30.0);
  const Plane diff = (r.video[1].plane(0) - r.video[0].plane(0)).abs();
  for (int y = 0; y < 40; ++y)
    for (int x = 0; x < 40; ++x) {
      const bool in_first = x >= 10 && x < 21 && y >= 15 && y < 26;
      const bool in_second = x >= 15 && x < 26 && y >= 15 && y < 26;
      EXPECT_EQ(diff(y, x) > 0.0, in_first || in_second) << x << "," << y;
    }
}

TEST(Render, RotationMatchesTrackerConvention) {
  const Frame marker = make_marker(15);
  std::vector<Pose> poses;
  for (int k = 0; k <= 9; ++k) poses.push_back(Pose{30, 30, 5.0 * k});
  const auto r = render_marker_video(poses, marker, Frame(60, 60, 1, 0.1), 30.0);
  const Template base{marker, Eigen::Vector2d(7, 7), marker.mask()};
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const Template rot = rotate_template(base, poses[i].theta);
    const SimilarityMap m = nssd_map(rot, r.video[i]);
    EXPECT_LT(m.scores(23, 23), 0.05);
    EXPECT_EQ(r.truth.xs[i], 30.0);
  }
}

TEST(Render, LeavingCanvasNamesFrame) {
  try {
    render_marker_video({Pose{20, 20, 0}, Pose{38, 20, 0}}, make_marker(11), Frame(40, 40, 1, 0.1), 30.0);
    FAIL();
  } catch (const BoundsError& e) {
    EXPECT_NE(std::string(e.what()).find("frame 1"), std::string::npos);
  }
}

TEST(Render, DampedCosineStartsAtAmplitude) {
  const auto poses = damped_cosine_track(10, 60.0, {50, 40}, 20, 15, 2.0, 0.3);
  ASSERT_EQ(poses.size(), 10u);
  EXPECT_DOUBLE_EQ(poses[0].x, 70.0);
  EXPECT_DOUBLE_EQ(poses[0].theta, 15.0);
  EXPECT_DOUBLE_EQ(poses[3].y, 40.0);
}

TEST(ParseField, ReadsTermsAndOrders) {
  const ReducedModel rm = parse_polynomial_field({"0.5*x1 - 2*x1^2*x2 + x2^3", "-x1 + 0.128x1x2"});
  EXPECT_EQ(rm.r, 3);
  EXPECT_EQ(rm.R(0, 0), 0.5);
  EXPECT_EQ(rm.R(0, rm.basis.index_of(Eigen::Vector2i(2, 1))), -2.0);
  EXPECT_EQ(rm.R(0, rm.basis.index_of(Eigen::Vector2i(0, 3))), 1.0);
  EXPECT_EQ(rm.R(1, 0), -1.0);
  EXPECT_EQ(rm.R(1, rm.basis.index_of(Eigen::Vector2i(1, 1))), 0.128);
  EXPECT_THROW(parse_polynomial_field({"x3"}), InputError);
}
