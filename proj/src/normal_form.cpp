#include "vidssm/errors.hpp"
#include "vidssm/reduced_dynamics.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace vidssm {

namespace {

struct Entry {
  int row;
  int col;
  Complex value;
};

// Real parameterization of a complex coefficient matrix whose rows and
// columns are permuted by complex conjugation. One orbit {(i,k), (pi(i), pi(k))}
// carries a complex parameter, or a real one when the orbit is a fixed point,
// so every parameter vector yields an exactly conjugate-symmetric matrix.
class SymmetricLayout {
 public:
  SymmetricLayout(int rows, int cols, const std::vector<int>& row_partner,
                  const std::vector<int>& col_partner,
                  const std::function<bool(int, int)>& include) : rows_(rows), cols_(cols) {
    std::vector<char> seen(static_cast<std::size_t>(rows) * cols, 0);
    for (int i = 0; i < rows; ++i)
      for (int k = 0; k < cols; ++k) {
        if (seen[i * cols + k] || !include(i, k)) continue;
        const int pi = row_partner[i];
        const int pk = col_partner[k];
        seen[i * cols + k] = 1;
        seen[pi * cols + pk] = 1;
        Orbit o{i, k, pi, pk, pi == i && pk == k, count_};
        count_ += o.self ? 1 : 2;
        orbits_.push_back(o);
      }
  }

  int parameter_count() const { return count_; }

  Eigen::MatrixXcd assemble(const Eigen::VectorXd& p) const {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(rows_, cols_);
    for (const auto& o : orbits_) {
      if (o.self) {
        m(o.row, o.col) = p(o.offset);
      } else {
        const Complex c(p(o.offset), p(o.offset + 1));
        m(o.row, o.col) = c;
        m(o.prow, o.pcol) = std::conj(c);
      }
    }
    return m;
  }

  // Nonzero entries of d(matrix)/d(parameter j).
  std::vector<Entry> derivative(int j) const {
    for (const auto& o : orbits_) {
      if (j < o.offset || j >= o.offset + (o.self ? 1 : 2)) continue;
      if (o.self) return {{o.row, o.col, Complex(1.0, 0.0)}};
      const Complex unit = j == o.offset ? Complex(1.0, 0.0) : Complex(0.0, 1.0);
      return {{o.row, o.col, unit}, {o.prow, o.pcol, std::conj(unit)}};
    }
    return {};
  }

 private:
  struct Orbit {
    int row, col, prow, pcol;
    bool self;
    int offset;
  };
  int rows_;
  int cols_;
  int count_ = 0;
  std::vector<Orbit> orbits_;
};

std::vector<int> exponent_partner(const MultiIndexBasis& basis, const std::vector<int>& partner) {
  std::vector<int> out(basis.size());
  for (int k = 0; k < basis.size(); ++k) {
    Eigen::VectorXi e(basis.dim());
    for (int i = 0; i < basis.dim(); ++i) e(partner[i]) = basis[k](i);
    out[k] = basis.index_of(e);
  }
  return out;
}

Eigen::VectorXcd normalize_eigenvector(Eigen::VectorXcd v) {
  v /= v.norm();
  const double cut = 1e-12;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::abs(v(i)) > cut) {
      v *= std::conj(v(i)) / std::abs(v(i));
      v(i) = std::abs(v(i));
      break;
    }
  return v;
}

}  // namespace

bool is_resonant(const Eigen::VectorXcd& lambda, int row, const Eigen::VectorXi& exponent, double tol) {
  Complex s(0.0, 0.0);
  for (Eigen::Index i = 0; i < lambda.size(); ++i) s += static_cast<double>(exponent(i)) * lambda(i);
  return std::abs(lambda(row) - s) < tol * std::abs(lambda(row));
}

NormalFormModel normal_form(const ReducedModel& model, const std::vector<Eigen::MatrixXd>& xi, int order,
                            const NormalFormOptions& options) {
  if (order < 1) throw InputError("normal form order must be at least 1");
  if (xi.empty()) throw InputError("normal form needs training trajectories");
  const int d = model.d;
  for (const auto& x : xi)
    if (x.rows() != d) throw ShapeError("training states have wrong dimension");

  // Eigen-decomposition, oscillatory pairs adjacent with the positive frequency first.
  Eigen::EigenSolver<Eigen::MatrixXd> es(model.linear_part());
  if (es.info() != Eigen::Success) throw ConditioningError("eigen-decomposition of the linear part failed");
  const Eigen::VectorXcd ev = es.eigenvalues();
  const Eigen::MatrixXcd evec = es.eigenvectors();
  const double spectral = ev.cwiseAbs().maxCoeff();
  std::vector<int> idx;
  for (int i = 0; i < d; ++i)
    if (ev(i).imag() >= 0.0 || std::abs(ev(i).imag()) <= 1e-12 * spectral) idx.push_back(i);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (ev(a).real() != ev(b).real()) return ev(a).real() > ev(b).real();
    return ev(a).imag() > ev(b).imag();
  });

  NormalFormModel nf;
  nf.d = d;
  nf.order = order;
  nf.basis = MultiIndexBasis(d, 1, order);
  nf.resonance_tol = options.resonance_tol;
  nf.W.resize(d, d);
  nf.lambda.resize(d);
  nf.partner.assign(d, 0);
  int col = 0;
  for (int i : idx) {
    if (col >= d) break;
    const bool real = std::abs(ev(i).imag()) <= 1e-12 * spectral;
    if (real) {
      nf.lambda(col) = Complex(ev(i).real(), 0.0);
      nf.W.col(col) = normalize_eigenvector(evec.col(i).real().cast<Complex>());
      nf.partner[col] = col;
      ++col;
    } else {
      if (col + 1 >= d) throw ConditioningError("unpaired complex eigenvalue in the linear part");
      nf.lambda(col) = ev(i);
      nf.lambda(col + 1) = std::conj(ev(i));
      nf.W.col(col) = normalize_eigenvector(evec.col(i));
      nf.W.col(col + 1) = nf.W.col(col).conjugate();
      nf.partner[col] = col + 1;
      nf.partner[col + 1] = col;
      col += 2;
    }
  }
  if (col != d) throw ConditioningError("could not pair the eigenvalues of the linear part");
  for (int i = 0; i < d; ++i)
    if (std::abs(nf.lambda(i)) < 1e-8)
      throw ConditioningError("linear part has a zero eigenvalue");
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(nf.W);
  const auto sv = svd.singularValues();
  if (!(sv(d - 1) > 1e-10 * sv(0))) throw ConditioningError("linear part is not diagonalizable");
  const Eigen::MatrixXcd Winv = nf.W.inverse();

  const MultiIndexBasis nl = order >= 2 ? MultiIndexBasis(d, 2, order) : MultiIndexBasis();
  const int K2 = order >= 2 ? nl.size() : 0;
  const int K = nf.basis.size();
  nf.H = Eigen::MatrixXcd::Zero(d, K);
  nf.N = Eigen::MatrixXcd::Zero(d, K);
  nf.T = Eigen::MatrixXcd::Zero(d, K);
  nf.H.leftCols(d) = Winv;
  nf.N.leftCols(d) = nf.lambda.asDiagonal();
  nf.T.leftCols(d) = nf.W;

  // Modal coordinates and their velocities under the reduced model.
  Eigen::Index total = 0;
  for (const auto& x : xi) total += x.cols();
  Eigen::MatrixXd X(d, total);
  {
    Eigen::Index c = 0;
    for (const auto& x : xi) {
      X.middleCols(c, x.cols()) = x;
      c += x.cols();
    }
  }
  Eigen::MatrixXcd q = Winv * X.cast<Complex>();
  Eigen::MatrixXcd qdot(d, total);
  for (Eigen::Index c = 0; c < total; ++c) qdot.col(c) = Winv * evaluate(model, X.col(c)).cast<Complex>();

  if (K2 > 0) {
    const std::vector<int> pk = exponent_partner(nl, nf.partner);
    const Eigen::Index rres = 2 * d * total;
    SymmetricLayout layout_h(d, K2, nf.partner, pk, [&](int i, int k) {
      return !is_resonant(nf.lambda, i, nl[k], options.resonance_tol);
    });
    SymmetricLayout layout_n(d, K2, nf.partner, pk, [&](int i, int k) {
      return is_resonant(nf.lambda, i, nl[k], options.resonance_tol);
    });
    const int ph = layout_h.parameter_count();
    const int pn = layout_n.parameter_count();
    const int P = ph + pn;

    Eigen::MatrixXcd phi_q(K2, total), psi(K2, total);
    for (Eigen::Index c = 0; c < total; ++c) {
      phi_q.col(c) = monomials(q.col(c), nl);
      psi.col(c) = monomial_jacobian(q.col(c), nl) * qdot.col(c);
    }

    auto residual = [&](const Eigen::VectorXd& p, Eigen::MatrixXd* jac) {
      const Eigen::MatrixXcd H2 = layout_h.assemble(p.head(ph));
      const Eigen::MatrixXcd N2 = layout_n.assemble(p.tail(pn));
      Eigen::VectorXd res(rres);
      if (jac) jac->setZero(rres, P);
      std::vector<std::vector<Entry>> dh(ph), dn(pn);
      if (jac) {
        for (int j = 0; j < ph; ++j) dh[j] = layout_h.derivative(j);
        for (int j = 0; j < pn; ++j) dn[j] = layout_n.derivative(j);
      }
      for (Eigen::Index c = 0; c < total; ++c) {
        const Eigen::VectorXcd z = q.col(c) + H2 * phi_q.col(c);
        const Eigen::VectorXcd zdot = qdot.col(c) + H2 * psi.col(c);
        const Eigen::VectorXcd phi_z = monomials(z, nl);
        const Eigen::VectorXcd r = zdot - nf.lambda.cwiseProduct(z) - N2 * phi_z;
        for (int i = 0; i < d; ++i) {
          res(2 * (c * d + i)) = r(i).real();
          res(2 * (c * d + i) + 1) = r(i).imag();
        }
        if (!jac) continue;
        const Eigen::MatrixXcd Jz = N2 * monomial_jacobian(z, nl);
        Eigen::VectorXcd dr(d);
        for (int j = 0; j < ph; ++j) {
          dr.setZero();
          for (const auto& e : dh[j]) {
            dr(e.row) += e.value * (psi(e.col, c) - nf.lambda(e.row) * phi_q(e.col, c));
            dr -= Jz.col(e.row) * (e.value * phi_q(e.col, c));
          }
          for (int i = 0; i < d; ++i) {
            (*jac)(2 * (c * d + i), j) = dr(i).real();
            (*jac)(2 * (c * d + i) + 1, j) = dr(i).imag();
          }
        }
        for (int j = 0; j < pn; ++j) {
          dr.setZero();
          for (const auto& e : dn[j]) dr(e.row) -= e.value * phi_z(e.col);
          for (int i = 0; i < d; ++i) {
            (*jac)(2 * (c * d + i), ph + j) = dr(i).real();
            (*jac)(2 * (c * d + i) + 1, ph + j) = dr(i).imag();
          }
        }
      }
      return res;
    };

    // Levenberg-Marquardt with column scaling, each step solved by QR.
    Eigen::VectorXd p = Eigen::VectorXd::Zero(P);
    Eigen::MatrixXd J;
    Eigen::VectorXd r = residual(p, &J);
    double cost = r.squaredNorm();
    const double floor = 1e-30 * std::max(qdot.squaredNorm(), 1e-300);
    double mu = 1e-3;
    bool converged = P == 0 || cost <= floor;
    int it = 0;
    for (; it < options.max_iterations && !converged; ++it) {
      Eigen::VectorXd scale = J.colwise().norm().transpose();
      for (Eigen::Index j = 0; j < P; ++j)
        if (!(scale(j) > 0.0)) scale(j) = 1.0;
      const Eigen::MatrixXd Js = J * scale.cwiseInverse().asDiagonal();
      bool accepted = false;
      while (!accepted) {
        Eigen::MatrixXd aug(rres + P, P);
        aug.topRows(rres) = Js;
        aug.bottomRows(P) = std::sqrt(mu) * Eigen::MatrixXd::Identity(P, P);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rres + P);
        rhs.head(rres) = -r;
        const Eigen::VectorXd step = scale.cwiseInverse().asDiagonal() *
                                     Eigen::VectorXd(aug.colPivHouseholderQr().solve(rhs));
        const Eigen::VectorXd trial = p + step;
        Eigen::MatrixXd Jt;
        const Eigen::VectorXd rt = residual(trial, &Jt);
        const double ct = rt.squaredNorm();
        if (std::isfinite(ct) && ct < cost) {
          const double rel = (cost - ct) / cost;
          const bool tiny = step.norm() <= options.tolerance * (p.norm() + options.tolerance);
          p = trial;
          r = rt;
          J = std::move(Jt);
          cost = ct;
          mu = std::max(mu / 3.0, 1e-12);
          accepted = true;
          if (rel < options.tolerance || tiny || cost <= floor) converged = true;
        } else {
          mu *= 4.0;
          if (mu > 1e16) {
            // No descent direction left: stationary to working precision.
            converged = true;
            break;
          }
        }
      }
    }
    if (!converged)
      throw ConvergenceError("normal form iteration did not converge in " +
                             std::to_string(options.max_iterations) + " iterations",
                             std::sqrt(cost / static_cast<double>(std::max<Eigen::Index>(rres, 1))));
    nf.iterations = it;
    nf.fit_residual = std::sqrt(cost / static_cast<double>(rres));
    nf.H.rightCols(K2) = layout_h.assemble(p.head(ph));
    nf.N.rightCols(K2) = layout_n.assemble(p.tail(pn));
  }

  // Normal coordinates of the data and the forward map by least squares.
  Eigen::MatrixXcd z(d, total);
  for (Eigen::Index c = 0; c < total; ++c) {
    z.col(c) = q.col(c);
    if (K2 > 0) z.col(c) += nf.H.rightCols(K2) * monomials(q.col(c), nl);
  }
  nf.max_training_amplitude = z.cwiseAbs().maxCoeff();

  if (K2 > 0) {
    std::vector<int> identity(d);
    std::iota(identity.begin(), identity.end(), 0);
    const std::vector<int> pk = exponent_partner(nl, nf.partner);
    SymmetricLayout layout_t(d, K2, identity, pk, [](int, int) { return true; });
    const int P = layout_t.parameter_count();
    Eigen::MatrixXcd phi_z(K2, total);
    for (Eigen::Index c = 0; c < total; ++c) phi_z.col(c) = monomials(z.col(c), nl);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(d * total, P);
    Eigen::VectorXd b(d * total);
    for (Eigen::Index c = 0; c < total; ++c) b.segment(c * d, d) = X.col(c) - (nf.W * z.col(c)).real();
    for (int j = 0; j < P; ++j)
      for (const auto& e : layout_t.derivative(j))
        for (Eigen::Index c = 0; c < total; ++c) A(c * d + e.row, j) += (e.value * phi_z(e.col, c)).real();
    Eigen::VectorXd scale = A.colwise().norm().transpose();
    for (Eigen::Index j = 0; j < P; ++j)
      if (!(scale(j) > 0.0)) scale(j) = 1.0;
    const Eigen::VectorXd sol = scale.cwiseInverse().asDiagonal() *
                                Eigen::VectorXd((A * scale.cwiseInverse().asDiagonal()).colPivHouseholderQr().solve(b));
    nf.T.rightCols(K2) = layout_t.assemble(sol);
  }
  return nf;
}

Eigen::VectorXcd to_normal_coordinates(const NormalFormModel& nf, const Eigen::VectorXd& xi) {
  if (xi.size() != nf.d) throw ShapeError("state dimension differs from the normal form");
  const Eigen::VectorXcd q = nf.inverse_eigenvectors() * xi.cast<Complex>();
  if (nf.order < 2) return q;
  const MultiIndexBasis nl(nf.d, 2, nf.order);
  return q + nf.H.rightCols(nl.size()) * monomials(q, nl);
}

Eigen::VectorXd from_normal_coordinates(const NormalFormModel& nf, const Eigen::VectorXcd& z) {
  if (z.size() != nf.d) throw ShapeError("normal coordinates have wrong dimension");
  return (nf.T * monomials(z, nf.basis)).real();
}

Eigen::VectorXcd normal_form_field(const NormalFormModel& nf, const Eigen::VectorXcd& z) {
  if (z.size() != nf.d) throw ShapeError("normal coordinates have wrong dimension");
  return nf.N * monomials(z, nf.basis);
}

}  // namespace vidssm
