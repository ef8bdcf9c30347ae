#include "vidssm/polynomial.hpp"

#include "vidssm/errors.hpp"

#include <functional>

namespace vidssm {

MultiIndexBasis::MultiIndexBasis(int d, int lo, int hi) : d_(d), lo_(lo), hi_(hi) {
  if (d < 1 || lo < 0 || hi < lo) throw InputError("invalid monomial basis orders");
  Eigen::VectorXi e(d);
  // Fill positions i..d-1 with `left` total degree, first variable highest.
  std::function<void(int, int)> fill = [&](int i, int left) {
    if (i == d - 1) {
      e(i) = left;
      exponents_.push_back(e);
      return;
    }
    for (int k = left; k >= 0; --k) {
      e(i) = k;
      fill(i + 1, left - k);
    }
  };
  for (int deg = lo; deg <= hi; ++deg) fill(0, deg);
}

int MultiIndexBasis::index_of(const Eigen::VectorXi& exponent) const {
  for (int k = 0; k < size(); ++k)
    if (exponents_[k] == exponent) return k;
  return -1;
}

std::string MultiIndexBasis::describe(int k) const {
  std::string s;
  for (int i = 0; i < d_; ++i) {
    const int p = exponents_[k](i);
    if (p == 0) continue;
    if (!s.empty()) s += '*';
    s += "x" + std::to_string(i + 1);
    if (p > 1) s += "^" + std::to_string(p);
  }
  return s.empty() ? "1" : s;
}

long MultiIndexBasis::count(int d, int lo, int hi) {
  // C(d + k - 1, k) monomials of degree exactly k.
  long total = 0;
  for (int k = lo; k <= hi; ++k) {
    long c = 1;
    for (int j = 1; j <= k; ++j) c = c * (d + j - 1) / j;
    total += c;
  }
  return total;
}

}  // namespace vidssm
