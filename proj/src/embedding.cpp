#include "vidssm/embedding.hpp"

#include "vidssm/errors.hpp"

namespace vidssm {

TimeSeries::TimeSeries(double dt_, Eigen::MatrixXd values_)
    : dt(dt_), values(std::move(values_)), origin_offset(Eigen::VectorXd::Zero(values.rows())) {
  if (!(dt > 0.0)) throw InputError("time step must be positive");
  if (values.cols() < 2) throw InputError("a time series needs at least two samples");
  if (!values.allFinite()) throw InputError("time series contains non-finite samples");
}

TimeSeries center(const TimeSeries& series, const Eigen::VectorXd& offset) {
  if (offset.size() != series.channels()) throw ShapeError("offset size differs from channel count");
  if (!offset.allFinite()) throw InputError("offset must be finite");
  TimeSeries out = series;
  out.values.colwise() -= offset;
  out.origin_offset = series.origin_offset + offset;
  return out;
}

Eigen::VectorXd tail_mean(const TimeSeries& series, Eigen::Index window) {
  if (window < 1 || window > series.length())
    throw InputError("tail window must lie in [1, series length]");
  return series.values.rightCols(window).rowwise().mean();
}

EmbeddedSeries delay_embed(const TimeSeries& series, int p, int lag_steps,
                           std::optional<int> manifold_dim) {
  if (p < 1) throw InputError("embedding needs p >= 1");
  if (lag_steps < 1) throw InputError("lag must be at least one sample");
  const Eigen::Index span = static_cast<Eigen::Index>(p - 1) * lag_steps;
  if (series.length() <= span)
    throw InputError("series of length " + std::to_string(series.length()) +
                     " is too short for p = " + std::to_string(p) + ", lag = " +
                     std::to_string(lag_steps));
  const Eigen::Index q = series.channels();
  const Eigen::Index count = series.length() - span;

  EmbeddedSeries out;
  out.p = p;
  out.lag_steps = lag_steps;
  out.dt = series.dt;
  out.vectors.resize(q * p, count);
  for (Eigen::Index c = 0; c < q; ++c)
    for (int k = 0; k < p; ++k)
      out.vectors.row(c * p + k) = series.values.row(c).segment(k * lag_steps, count);

  if (manifold_dim && p < 2 * *manifold_dim + 1)
    out.warnings.push_back("p = " + std::to_string(p) + " is below 2d + 1 = " +
                           std::to_string(2 * *manifold_dim + 1) +
                           "; the embedding may not be faithful");
  return out;
}

Eigen::MatrixXd estimate_derivative(const Eigen::MatrixXd& x, double dt) {
  if (!(dt > 0.0)) throw InputError("time step must be positive");
  const Eigen::Index n = x.cols();
  if (n < 5) throw InputError("derivative estimation needs at least 5 samples");
  Eigen::MatrixXd d(x.rows(), n);
  for (Eigen::Index k = 2; k < n - 2; ++k)
    d.col(k) = (-x.col(k + 2) + 8.0 * x.col(k + 1) - 8.0 * x.col(k - 1) + x.col(k - 2)) / (12.0 * dt);
  for (Eigen::Index k : {Eigen::Index{0}, Eigen::Index{1}})
    d.col(k) = (-3.0 * x.col(k) + 4.0 * x.col(k + 1) - x.col(k + 2)) / (2.0 * dt);
  for (Eigen::Index k : {n - 2, n - 1})
    d.col(k) = (3.0 * x.col(k) - 4.0 * x.col(k - 1) + x.col(k - 2)) / (2.0 * dt);
  return d;
}

}  // namespace vidssm
