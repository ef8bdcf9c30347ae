#include "vidssm/metrics.hpp"

#include "vidssm/errors.hpp"

namespace vidssm {

namespace {

void check_shapes(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate) {
  if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols())
    throw ShapeError("truth and estimate differ in shape");
  if (truth.cols() == 0) throw InputError("metrics need at least one sample");
}

Eigen::VectorXd channel_ranges(const Eigen::MatrixXd& truth) {
  Eigen::VectorXd r = truth.rowwise().maxCoeff() - truth.rowwise().minCoeff();
  for (Eigen::Index c = 0; c < r.size(); ++c)
    if (!(r(c) > 0.0)) throw NormalizationError(static_cast<long>(c));
  return r;
}

Eigen::MatrixXd normalized_error(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate,
                                 const Eigen::VectorXd& ranges) {
  return (estimate - truth).array().colwise() / ranges.array();
}

template <typename Metric>
double mean_over(const std::vector<Eigen::MatrixXd>& truth, const std::vector<Eigen::MatrixXd>& est,
                 Metric metric) {
  if (truth.size() != est.size() || truth.empty())
    throw InputError("need matching, non-empty trajectory lists");
  double s = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) s += metric(truth[i], est[i]);
  return s / static_cast<double>(truth.size());
}

}  // namespace

ErrorReport ermse_report(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate) {
  check_shapes(truth, estimate);
  ErrorReport r{"ERMSE", 0.0, channel_ranges(truth)};
  r.value = std::sqrt(normalized_error(truth, estimate, r.ranges).squaredNorm() /
                      static_cast<double>(truth.size()));
  return r;
}

ErrorReport cnmte_report(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate) {
  check_shapes(truth, estimate);
  ErrorReport r{"CNMTE", 0.0, channel_ranges(truth)};
  r.value = normalized_error(truth, estimate, r.ranges).colwise().norm().mean();
  return r;
}

double ermse(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate) {
  return ermse_report(truth, estimate).value;
}

double cnmte(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate) {
  return cnmte_report(truth, estimate).value;
}

double nmte(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate) {
  check_shapes(truth, estimate);
  const double scale = truth.colwise().norm().maxCoeff();
  if (!(scale > 0.0)) throw NormalizationError(-1, "NMTE normalizer is zero (all-zero truth)");
  return (estimate - truth).colwise().norm().mean() / scale;
}

double mean_ermse(const std::vector<Eigen::MatrixXd>& truth, const std::vector<Eigen::MatrixXd>& estimate) {
  return mean_over(truth, estimate, [](const auto& a, const auto& b) { return ermse(a, b); });
}

double mean_cnmte(const std::vector<Eigen::MatrixXd>& truth, const std::vector<Eigen::MatrixXd>& estimate) {
  return mean_over(truth, estimate, [](const auto& a, const auto& b) { return cnmte(a, b); });
}

}  // namespace vidssm
