#pragma once

#include <cmath>
#include <cstdlib>

#include "dwelltime/types.hpp"

namespace dwelltime {

// Value and first derivative of a solution of y'' = -q(x) y.
template <typename Scalar>
struct WaveState {
  Scalar value;
  Scalar derivative;
};

// Classical RK4 on the first-order system (y, y') from x0 to x1, used to take
// the first step of each smooth segment and to reach off-grid breakpoints.
template <typename Scalar, typename QFn>
WaveState<Scalar> rk4_propagate(QFn&& q, double x0, double x1, WaveState<Scalar> s, int substeps = 8) {
  const double dx = (x1 - x0) / substeps;
  Scalar y = s.value;
  Scalar dy = s.derivative;
  for (int n = 0; n < substeps; ++n) {
    const double x = x0 + n * dx;
    const Scalar q0 = q(x);
    const Scalar qm = q(x + 0.5 * dx);
    const Scalar q1 = q(x + dx);
    const Scalar k1y = dy;
    const Scalar k1d = -q0 * y;
    const Scalar k2y = dy + 0.5 * dx * k1d;
    const Scalar k2d = -qm * (y + 0.5 * dx * k1y);
    const Scalar k3y = dy + 0.5 * dx * k2d;
    const Scalar k3d = -qm * (y + 0.5 * dx * k2y);
    const Scalar k4y = dy + dx * k3d;
    const Scalar k4d = -q1 * (y + dx * k3y);
    y += dx / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    dy += dx / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
  }
  return {y, dy};
}

inline constexpr double kRescaleThreshold = 1e150;

// Numerov propagation of y'' = -q y across one smooth segment, from node
// `first` (whose value and derivative are already stored) to node `last`, in
// either direction. x_of maps a node index to its position; q must be smooth on
// the closed segment (callers pass one-sided limits at its ends).
//
// Derivatives come from the Numerov companion formulas: central
//   y'_i = [y_{i+1}(1 + h^2 q_{i+1}/6) - y_{i-1}(1 + h^2 q_{i-1}/6)] / 2h
// inside the segment and the one-sided fourth-order closure
//   y'_N = (y_N - y_{N-1})/h + h (6 y''_N + 9 y''_{N-1} - 4 y''_{N-2} + y''_{N-3}) / 24
// at its far end. The closure's h^4 error term equals the companion formula's
// (-7/360 h^4 y^(5)), so the derivative error stays smooth up to the end node
// and differencing it does not lose an order. Returns true if the stored solution was rescaled to avoid
// overflow.
template <typename Scalar, typename QFn, typename PosFn>
bool numerov_segment(VectorX<Scalar>& y, VectorX<Scalar>& dy, Index first, Index last, double h,
                     PosFn&& x_of, QFn&& q) {
  const Index n = std::abs(last - first);
  if (n == 0) return false;
  const Index dir = last > first ? 1 : -1;
  const double step = static_cast<double>(dir) * h;
  const double h2 = h * h;
  auto node = [&](Index j) { return first + dir * j; };

  VectorX<Scalar> qv(n + 1);
  for (Index j = 0; j <= n; ++j) qv(j) = q(x_of(node(j)));

  const WaveState<Scalar> start{y(first), dy(first)};
  const auto next = rk4_propagate<Scalar>(q, x_of(first), x_of(node(1)), start);
  y(node(1)) = next.value;
  dy(node(1)) = next.derivative;
  if (n == 1) return false;

  // Summed form on w = (1 + h^2 q / 12) y: the difference d = w_{j+1} - w_j is
  // carried explicitly and both sums are compensated, which keeps roundoff
  // growth at O(eps / h) instead of O(eps / h^2).
  bool rescaled = false;
  auto w_of = [&](Index j) { return (1.0 + h2 * qv(j) / 12.0) * y(node(j)); };
  Scalar w = w_of(1);
  Scalar d = w - w_of(0);
  Scalar w_carry(0.0);
  Scalar d_carry(0.0);
  auto add = [](Scalar& sum, Scalar& carry, Scalar term) {
    const Scalar t = term - carry;
    const Scalar s = sum + t;
    carry = (s - sum) - t;
    sum = s;
  };
  for (Index j = 1; j < n; ++j) {
    add(d, d_carry, -h2 * qv(j) * y(node(j)));
    add(w, w_carry, d);
    y(node(j + 1)) = w / (1.0 + h2 * qv(j + 1) / 12.0);
    if (std::abs(y(node(j + 1))) > kRescaleThreshold) {
      const double s = 1.0 / kRescaleThreshold;
      y *= s;
      dy *= s;
      w *= s;
      d *= s;
      w_carry *= s;
      d_carry *= s;
      rescaled = true;
    }
  }
  for (Index j = 1; j < n; ++j) {
    dy(node(j)) = (y(node(j + 1)) * (1.0 + h2 * qv(j + 1) / 6.0) -
                   y(node(j - 1)) * (1.0 + h2 * qv(j - 1) / 6.0)) /
                  (2.0 * step);
  }
  const Scalar ddn = -qv(n) * y(node(n));
  const Scalar dd1 = -qv(n - 1) * y(node(n - 1));
  const Scalar dd2 = -qv(n - 2) * y(node(n - 2));
  if (n == 2) {
    dy(node(n)) = (y(node(n)) - y(node(n - 1))) / step +
                  step * (7.0 / 24.0 * ddn + 0.25 * dd1 - 1.0 / 24.0 * dd2);
    return rescaled;
  }
  const Scalar dd3 = -qv(n - 3) * y(node(n - 3));
  dy(node(n)) = (y(node(n)) - y(node(n - 1))) / step +
                step * (6.0 / 24.0 * ddn + 9.0 / 24.0 * dd1 - 4.0 / 24.0 * dd2 + 1.0 / 24.0 * dd3);
  return rescaled;
}

}  // namespace dwelltime
