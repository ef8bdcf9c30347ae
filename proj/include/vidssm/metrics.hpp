#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

namespace vidssm {

/// A named error value with the per-channel ranges that normalized it.
struct ErrorReport {
  std::string metric;
  double value = 0.0;
  Eigen::VectorXd ranges;
};

// All metrics take (channels x samples) matrices; ranges come from `truth`.

/// Root of the mean over samples and channels of squared range-normalized errors.
double ermse(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate);
/// Mean over samples of the norm of the range-normalized error vector.
double cnmte(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate);
/// Mean error norm divided by the largest sample norm of `truth`.
double nmte(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate);

ErrorReport ermse_report(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate);
ErrorReport cnmte_report(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate);

/// Several trajectories: each is normalized by its own ranges and the
/// metric values are averaged.
double mean_ermse(const std::vector<Eigen::MatrixXd>& truth, const std::vector<Eigen::MatrixXd>& estimate);
double mean_cnmte(const std::vector<Eigen::MatrixXd>& truth, const std::vector<Eigen::MatrixXd>& estimate);

}  // namespace vidssm
