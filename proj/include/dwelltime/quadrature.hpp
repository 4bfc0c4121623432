#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "dwelltime/types.hpp"

namespace dwelltime {

// Composite Simpson rule over f(i0..i1) with uniform spacing h. An odd number
// of intervals closes with the 3/8 rule on the last three; a single interval
// falls back to the trapezoid rule.
template <typename Derived>
typename Derived::Scalar simpson(const Eigen::DenseBase<Derived>& f, double h, Index i0, Index i1) {
  using Scalar = typename Derived::Scalar;
  const Index n = i1 - i0;
  if (n <= 0) return Scalar(0);
  if (n == 1) return Scalar(0.5 * h) * (f(i0) + f(i1));
  Scalar sum(0);
  Index simpson_end = i1;
  if (n % 2 == 1) {
    simpson_end = i1 - 3;
    sum += Scalar(3.0 * h / 8.0) * (f(simpson_end) + Scalar(3) * f(simpson_end + 1) +
                                    Scalar(3) * f(simpson_end + 2) + f(i1));
  }
  if (simpson_end > i0) {
    Scalar inner = f(i0) + f(simpson_end);
    for (Index i = i0 + 1; i < simpson_end; ++i) inner += Scalar(i % 2 == i0 % 2 ? 2 : 4) * f(i);
    sum += Scalar(h / 3.0) * inner;
  }
  return sum;
}

template <typename Derived>
typename Derived::Scalar simpson(const Eigen::DenseBase<Derived>& f, double h) {
  return simpson(f, h, 0, f.size() - 1);
}

// Simpson applied separately on each smooth piece of [i0, i1].
template <typename Derived>
typename Derived::Scalar simpson_piecewise(const Eigen::DenseBase<Derived>& f, double h,
                                           const std::vector<Index>& breaks, Index i0, Index i1) {
  using Scalar = typename Derived::Scalar;
  Scalar sum(0);
  Index lo = i0;
  for (Index b : breaks) {
    if (b <= lo) continue;
    if (b >= i1) break;
    sum += simpson(f, h, lo, b);
    lo = b;
  }
  return sum + simpson(f, h, lo, i1);
}

// Quadrature weights realizing simpson_piecewise on the full range, for use in
// tensor contractions (w^T F w).
VectorXd simpson_weights(Index n, double h, const std::vector<Index>& breaks);

// Fourth-order first derivative of sampled values, differenced separately on
// each smooth piece so no stencil straddles a break.
template <typename Derived>
VectorX<typename Derived::Scalar> differentiate(const Eigen::DenseBase<Derived>& f, double h,
                                               const std::vector<Index>& breaks) {
  using Scalar = typename Derived::Scalar;
  const Index n = f.size();
  VectorX<Scalar> df(n);
  std::vector<Index> cuts(breaks.begin(), breaks.end());
  cuts.push_back(0);
  cuts.push_back(n - 1);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  const Scalar inv12h(1.0 / (12.0 * h));
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const Index a = cuts[s];
    const Index b = cuts[s + 1];
    const Index m = b - a;
    if (m < 4) {
      if (m == 1) {
        df(a) = df(b) = (f(b) - f(a)) / Scalar(h);
        continue;
      }
      for (Index i = a + 1; i < b; ++i) df(i) = (f(i + 1) - f(i - 1)) / Scalar(2.0 * h);
      df(a) = (Scalar(-3) * f(a) + Scalar(4) * f(a + 1) - f(a + 2)) / Scalar(2.0 * h);
      df(b) = (Scalar(3) * f(b) - Scalar(4) * f(b - 1) + f(b - 2)) / Scalar(2.0 * h);
      continue;
    }
    df(a) = (Scalar(-25) * f(a) + Scalar(48) * f(a + 1) - Scalar(36) * f(a + 2) +
             Scalar(16) * f(a + 3) - Scalar(3) * f(a + 4)) * inv12h;
    df(a + 1) = (Scalar(-3) * f(a) - Scalar(10) * f(a + 1) + Scalar(18) * f(a + 2) -
                 Scalar(6) * f(a + 3) + f(a + 4)) * inv12h;
    for (Index i = a + 2; i <= b - 2; ++i) {
      df(i) = (f(i - 2) - Scalar(8) * f(i - 1) + Scalar(8) * f(i + 1) - f(i + 2)) * inv12h;
    }
    df(b - 1) = (Scalar(3) * f(b) + Scalar(10) * f(b - 1) - Scalar(18) * f(b - 2) +
                 Scalar(6) * f(b - 3) - f(b - 4)) * inv12h;
    df(b) = (Scalar(25) * f(b) - Scalar(48) * f(b - 1) + Scalar(36) * f(b - 2) -
             Scalar(16) * f(b - 3) + Scalar(3) * f(b - 4)) * inv12h;
  }
  return df;
}

// Five-point central difference of a scalar function of one variable.
template <typename Fn>
auto five_point_derivative(Fn&& fn, double x, double h) {
  const auto fm2 = fn(x - 2.0 * h);
  const auto fm1 = fn(x - h);
  const auto fp1 = fn(x + h);
  const auto fp2 = fn(x + 2.0 * h);
  return (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
}

// Richardson combination of two fourth-order estimates taken at h and h/2.
template <typename T>
T richardson4(const T& coarse, const T& fine) {
  return (16.0 * fine - coarse) / 15.0;
}

}  // namespace dwelltime
