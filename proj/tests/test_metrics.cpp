#include "vidssm/errors.hpp"
#include "vidssm/metrics.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace vidssm;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = g(rng);
  return m;
}

}  // namespace

TEST(Ermse, IdenticalIsZero) {
  std::mt19937 rng(1);
  const Eigen::MatrixXd y = random_matrix(3, 20, rng);
  EXPECT_EQ(ermse(y, y), 0.0);
  EXPECT_EQ(cnmte(y, y), 0.0);
  EXPECT_EQ(nmte(y, y), 0.0);
}

TEST(Ermse, ConstantErrorOverRangeTwo) {
  Eigen::MatrixXd truth(1, 5);
  truth << 0.0, 1.0, 2.0, 1.0, 0.5;
  const Eigen::MatrixXd est = truth.array() + 0.2;
  EXPECT_NEAR(ermse(truth, est), 0.1, 1e-12);
}

TEST(Ermse, ConstantChannelThrows) {
  Eigen::MatrixXd truth(2, 3);
  truth << 1, 2, 3, 4, 4, 4;
  try {
    ermse(truth, truth);
    FAIL();
  } catch (const NormalizationError& e) {
    EXPECT_EQ(e.channel(), 1);
  }
  EXPECT_THROW(cnmte(truth, truth), NormalizationError);
}

TEST(Ermse, ReportCarriesRanges) {
  Eigen::MatrixXd truth(2, 3);
  truth << 0, 2, 1, -1, 3, 0;
  const ErrorReport r = ermse_report(truth, truth);
  EXPECT_EQ(r.metric, "ERMSE");
  EXPECT_EQ(r.ranges, Eigen::Vector2d(2.0, 4.0));
}

TEST(Cnmte, ThreeFourFive) {
  Eigen::MatrixXd truth(2, 4);
  truth << 0, 1, 0, 1,
           0, 0, 2, 2;
  Eigen::MatrixXd est = truth;
  est.row(0).array() += 0.3;  // range 1
  est.row(1).array() += 0.8;  // range 2
  EXPECT_NEAR(cnmte(truth, est), 0.5, 1e-12);
}

TEST(Cnmte, SingleChannelIsMeanAbsoluteError) {
  Eigen::MatrixXd truth(1, 4);
  truth << 0, 4, 2, 1;
  Eigen::MatrixXd est(1, 4);
  est << 1, 4, 0, 2;
  EXPECT_NEAR(cnmte(truth, est), (1.0 + 0.0 + 2.0 + 1.0) / 4.0 / 4.0, 1e-12);
}

TEST(Nmte, ConstantOffset) {
  Eigen::MatrixXd truth(2, 3);
  truth << 3, 0, 1,
           4, 1, 0;
  const Eigen::Vector2d c(0.3, -0.4);
  const Eigen::MatrixXd est = truth.colwise() + c;
  EXPECT_NEAR(nmte(truth, est), 0.5 / 5.0, 1e-12);
}

TEST(Nmte, AllZeroTruthThrows) {
  EXPECT_THROW(nmte(Eigen::MatrixXd::Zero(2, 3), Eigen::MatrixXd::Ones(2, 3)), NormalizationError);
}

TEST(Metrics, ShapeMismatchThrows) {
  EXPECT_THROW(ermse(Eigen::MatrixXd::Ones(2, 3), Eigen::MatrixXd::Ones(3, 3)), ShapeError);
}

TEST(Metrics, InvariantUnderJointAffineRescaling) {
  std::mt19937 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd truth = random_matrix(4, 50, rng);
    const Eigen::MatrixXd est = truth + 0.1 * random_matrix(4, 50, rng);
    const Eigen::VectorXd scale = random_matrix(4, 1, rng).array().abs() + 0.1;
    const Eigen::VectorXd shift = 10.0 * random_matrix(4, 1, rng);
    const auto affine = [&](const Eigen::MatrixXd& y) {
      return Eigen::MatrixXd((y.array().colwise() * scale.array()).colwise() + shift.array());
    };
    EXPECT_NEAR(ermse(affine(truth), affine(est)), ermse(truth, est), 1e-12);
    EXPECT_NEAR(cnmte(affine(truth), affine(est)), cnmte(truth, est), 1e-12);
  }
}

TEST(Metrics, SymmetricInChannelPermutation) {
  std::mt19937 rng(3);
  const Eigen::MatrixXd truth = random_matrix(3, 30, rng);
  const Eigen::MatrixXd est = truth + 0.2 * random_matrix(3, 30, rng);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(3);
  perm.indices() << 2, 0, 1;
  EXPECT_NEAR(ermse(perm * truth, perm * est), ermse(truth, est), 1e-14);
  EXPECT_NEAR(cnmte(perm * truth, perm * est), cnmte(truth, est), 1e-14);
  EXPECT_NEAR(nmte(perm * truth, perm * est), nmte(truth, est), 1e-14);
}

TEST(Metrics, TrajectoriesAveragedWithOwnRanges) {
  Eigen::MatrixXd a(1, 2), b(1, 2);
  a << 0, 1;
  b << 0, 10;
  const Eigen::MatrixXd ea = a.array() + 0.1;
  const Eigen::MatrixXd eb = b.array() + 0.1;
  EXPECT_NEAR(mean_cnmte({a, b}, {ea, eb}), (0.1 + 0.01) / 2.0, 1e-15);
  EXPECT_NEAR(mean_ermse({a, b}, {ea, eb}), (0.1 + 0.01) / 2.0, 1e-15);
}
