#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace vidssm {

/// Uniformly sampled q-channel signal; column k is the sample at k * dt.
struct TimeSeries {
  double dt = 0.0;
  Eigen::MatrixXd values;          // q x N
  Eigen::VectorXd origin_offset;   // already subtracted from `values`

  TimeSeries() = default;
  TimeSeries(double dt, Eigen::MatrixXd values);

  Eigen::Index channels() const { return values.rows(); }
  Eigen::Index length() const { return values.cols(); }
};

/// Delay-embedded vectors. Row index = channel * p + delay.
struct EmbeddedSeries {
  int p = 1;
  int lag_steps = 1;
  double dt = 0.0;
  Eigen::MatrixXd vectors;  // (q p) x (N - (p - 1) lag)
  std::vector<std::string> warnings;

  Eigen::Index dim() const { return vectors.rows(); }
  Eigen::Index length() const { return vectors.cols(); }
};

/// Shifts every sample by -offset and records the offset.
TimeSeries center(const TimeSeries& series, const Eigen::VectorXd& offset);

/// Mean of the last `window` samples, a fixed-point estimate for decaying data.
Eigen::VectorXd tail_mean(const TimeSeries& series, Eigen::Index window);

/// Stacks samples k, k + lag, ..., k + (p - 1) lag of every channel.
/// When `manifold_dim` is given and p < 2 d + 1 a warning is attached.
EmbeddedSeries delay_embed(const TimeSeries& series, int p, int lag_steps = 1,
                           std::optional<int> manifold_dim = std::nullopt);

/// Time derivative of each row of `x` (rows = components, cols = samples):
/// fourth-order central differences inside, second-order one-sided
/// differences at the two samples nearest each end.
Eigen::MatrixXd estimate_derivative(const Eigen::MatrixXd& x, double dt);

}  // namespace vidssm
