#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

namespace vidssm {

/// Exponent tuples of all d-variate monomials with total degree lo..hi,
/// in graded-lexicographic order: by degree, then by descending power of
/// the first variable, then the second, and so on. For d = 2, degrees 2..3
/// this is x1^2, x1 x2, x2^2, x1^3, x1^2 x2, x1 x2^2, x2^3.
class MultiIndexBasis {
 public:
  MultiIndexBasis() = default;
  MultiIndexBasis(int d, int lo, int hi);

  int dim() const { return d_; }
  int min_order() const { return lo_; }
  int max_order() const { return hi_; }
  int size() const { return static_cast<int>(exponents_.size()); }
  const std::vector<Eigen::VectorXi>& exponents() const { return exponents_; }
  const Eigen::VectorXi& operator[](int i) const { return exponents_[i]; }

  /// Position of `exponent` in the basis, or -1.
  int index_of(const Eigen::VectorXi& exponent) const;

  /// Human-readable monomial, e.g. "x1^2*x2".
  std::string describe(int i) const;

  /// Number of d-variate monomials of degree lo..hi.
  static long count(int d, int lo, int hi);

 private:
  int d_ = 0;
  int lo_ = 0;
  int hi_ = 0;
  std::vector<Eigen::VectorXi> exponents_;
};

namespace detail {

// powers(i, k) = x_i^k for k = 0..hi.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> power_table(const Eigen::MatrixBase<Derived>& x,
                                                                 int hi) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> p(x.size(), hi + 1);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    p(i, 0) = Scalar(1);
    for (int k = 1; k <= hi; ++k) p(i, k) = p(i, k - 1) * Scalar(x(i));
  }
  return p;
}

}  // namespace detail

/// Values of every basis monomial at the point `x`.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> monomials(
    const Eigen::MatrixBase<Derived>& x, const MultiIndexBasis& basis) {
  using Scalar = typename Derived::Scalar;
  const auto pw = detail::power_table<Scalar>(x, basis.max_order());
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(basis.size());
  for (int k = 0; k < basis.size(); ++k) {
    Scalar v(1);
    const auto& e = basis[k];
    for (int i = 0; i < basis.dim(); ++i)
      if (e(i)) v *= pw(i, e(i));
    out(k) = v;
  }
  return out;
}

/// Monomials of every column of `X` (d x N) -> basis.size() x N.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> monomials_batch(
    const Eigen::MatrixBase<Derived>& X, const MultiIndexBasis& basis) {
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(basis.size(), X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) out.col(j) = monomials(X.col(j), basis);
  return out;
}

/// Jacobian (basis.size() x d) of the monomial vector at `x`.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> monomial_jacobian(
    const Eigen::MatrixBase<Derived>& x, const MultiIndexBasis& basis) {
  using Scalar = typename Derived::Scalar;
  const auto pw = detail::power_table<Scalar>(x, basis.max_order());
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> J =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(basis.size(), basis.dim());
  for (int k = 0; k < basis.size(); ++k) {
    const auto& e = basis[k];
    for (int j = 0; j < basis.dim(); ++j) {
      if (e(j) == 0) continue;
      Scalar v = Scalar(static_cast<double>(e(j))) * pw(j, e(j) - 1);
      for (int i = 0; i < basis.dim(); ++i)
        if (i != j && e(i)) v *= pw(i, e(i));
      J(k, j) = v;
    }
  }
  return J;
}

}  // namespace vidssm
