#pragma once

#include "vidssm/errors.hpp"

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <vector>

namespace vidssm {

/// Classical fixed-step fourth-order Runge-Kutta. `field(x)` returns dx/dt
/// for an autonomous system; the result holds steps + 1 states starting at
/// x0. A non-finite state, or one whose norm exceeds `bound`, raises
/// DivergenceError carrying the time reached.
template <typename Derived, typename Field>
std::vector<typename Derived::PlainObject> rk4(Field&& field, const Eigen::MatrixBase<Derived>& x0, double dt,
                                               long steps,
                                               double bound = std::numeric_limits<double>::infinity()) {
  using State = typename Derived::PlainObject;
  if (!(dt > 0.0)) throw InputError("integration step must be positive");
  if (steps < 0) throw InputError("step count must be non-negative");
  std::vector<State> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  State x = x0;
  out.push_back(x);
  for (long k = 0; k < steps; ++k) {
    const State k1 = field(x);
    const State k2 = field(State(x + 0.5 * dt * k1));
    const State k3 = field(State(x + 0.5 * dt * k2));
    const State k4 = field(State(x + dt * k3));
    x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double norm = x.norm();
    if (!std::isfinite(norm) || norm > bound) throw DivergenceError((k + 1) * dt);
    out.push_back(x);
  }
  return out;
}

/// Stacks a trajectory into a (state dim) x (steps + 1) matrix.
template <typename State>
Eigen::Matrix<typename State::Scalar, Eigen::Dynamic, Eigen::Dynamic> stack_columns(
    const std::vector<State>& states) {
  Eigen::Matrix<typename State::Scalar, Eigen::Dynamic, Eigen::Dynamic> m(
      states.empty() ? 0 : states.front().size(), static_cast<Eigen::Index>(states.size()));
  for (std::size_t j = 0; j < states.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = states[j];
  return m;
}

}  // namespace vidssm
