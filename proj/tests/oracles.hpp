#pragma once

// Closed-form and brute-force reference values. Nothing here calls into the
// library, so tests compare two independent computations.

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Dense>

namespace oracle {

using cld = std::complex<long double>;
using cd = std::complex<double>;
constexpr long double kPi = std::numbers::pi_v<long double>;

inline long double wrap_half_pi(long double x) {
  // Representative in (-pi/2, pi/2].
  long double y = std::fmod(x, kPi);
  if (y > kPi / 2) y -= kPi;
  if (y <= -kPi / 2) y += kPi;
  return y;
}

// s-wave square well V = -V0 for r < a: delta = atan((k/k') tan(k'a)) - ka.
struct SquareWell {
  long double V0;
  long double a;
  long double m;

  long double k(long double E) const { return std::sqrt(2 * m * E); }
  long double kin(long double E) const { return std::sqrt(2 * m * (E + V0)); }

  long double delta(long double E) const {
    const long double q = kin(E);
    return wrap_half_pi(std::atan(k(E) / q * std::tan(q * a)) - k(E) * a);
  }

  // Analytic d delta / dE.
  long double ddelta(long double E) const {
    const long double kk = k(E);
    const long double q = kin(E);
    const long double dk = m / kk;
    const long double dq = m / q;
    const long double t = std::tan(q * a);
    const long double u = kk / q * t;
    const long double du = (dk * q - kk * dq) / (q * q) * t + kk / q * a * dq / (std::cos(q * a) * std::cos(q * a));
    return du / (1 + u * u) - a * dk;
  }

  // Regular solution with phi'(0) = 1 inside the well.
  long double phi_inside(long double E, long double r) const { return std::sin(kin(E) * r) / kin(E); }

  // int_0^a |phi|^2 for the unit-incident-flux standing wave
  // (1/sqrt(v)) [e^{-ikr} - e^{2i delta} e^{ikr}], |phi| = (2/sqrt(v)) |sin(kr + delta)| outside.
  long double dwell_inside(long double E) const {
    const long double kk = k(E);
    const long double q = kin(E);
    const long double v = kk / m;
    const long double d = delta(E);
    const long double amp2 = 4 / v * std::pow(std::sin(kk * a + d), 2) / std::pow(std::sin(q * a), 2);
    return amp2 * (a / 2 - std::sin(2 * q * a) / (4 * q));
  }
};

// Plane wave incident from the left on V = V0 for 0 <= x < L.
struct RectBarrier {
  long double V0;
  long double L;
  long double m;

  struct Amplitudes {
    cld R, T, A, B, q;
  };

  // Matching at x = 0 and x = L solved as a 4x4 linear system, valid for any E != V0.
  Amplitudes amplitudes(long double E) const {
    using Mat = Eigen::Matrix<cld, 4, 4>;
    using Vec = Eigen::Matrix<cld, 4, 1>;
    const cld I(0, 1);
    const long double k = std::sqrt(2 * m * E);
    const cld q = std::sqrt(cld(2 * m * (E - V0), 0));
    const cld eq = std::exp(I * q * L);
    const cld eqm = std::exp(-I * q * L);
    const cld ek = std::exp(I * k * L);
    // unknowns (R, A, B, T)
    Mat M;
    Vec b;
    M << cld(-1), cld(1), cld(1), cld(0),
         I * k, I * q, -I * q, cld(0),
         cld(0), eq, eqm, -ek,
         cld(0), I * q * eq, -I * q * eqm, -I * k * ek;
    b << cld(1), I * k, cld(0), cld(0);
    const Vec x = M.partialPivLu().solve(b);
    return {x(0), x(3), x(1), x(2), q};
  }

  long double transmission(long double E) const {
    if (E == V0) {
      const long double k = std::sqrt(2 * m * E);
      return 1 / (1 + k * k * L * L / 4);
    }
    if (E < V0) {
      const long double kap = std::sqrt(2 * m * (V0 - E));
      const long double s = std::sinh(kap * L);
      return 1 / (1 + V0 * V0 * s * s / (4 * E * (V0 - E)));
    }
    const long double q = std::sqrt(2 * m * (E - V0));
    const long double s = std::sin(q * L);
    return 1 / (1 + V0 * V0 * s * s / (4 * E * (E - V0)));
  }

  cld psi_inside(const Amplitudes& amp, long double x) const {
    const cld I(0, 1);
    return amp.A * std::exp(I * amp.q * x) + amp.B * std::exp(-I * amp.q * x);
  }

  // Trapezoid rule with n panels on the analytic interior density, over the flux k/m.
  long double dwell_trapezoid(long double E, long n = 1000000) const {
    const auto amp = amplitudes(E);
    const long double h = L / n;
    long double sum = 0.5L * (std::norm(psi_inside(amp, 0)) + std::norm(psi_inside(amp, L)));
    for (long i = 1; i < n; ++i) sum += std::norm(psi_inside(amp, i * h));
    return sum * h / (std::sqrt(2 * m * E) / m);
  }

  // |T|^2 d(arg T + kL)/dE + |R|^2 d arg R/dE, central differences of the analytic amplitudes.
  long double phase_time(long double E) const {
    const long double h = 1e-6L * E;
    auto theta_t = [&](long double e) { return std::arg(amplitudes(e).T) + std::sqrt(2 * m * e) * L; };
    auto theta_r = [&](long double e) { return std::arg(amplitudes(e).R); };
    auto unwrap = [](long double d) {
      while (d > kPi) d -= 2 * kPi;
      while (d < -kPi) d += 2 * kPi;
      return d;
    };
    const long double dt = unwrap(theta_t(E + h) - theta_t(E - h)) / (2 * h);
    const long double dr = unwrap(theta_r(E + h) - theta_r(E - h)) / (2 * h);
    const auto amp = amplitudes(E);
    return std::norm(amp.T) * dt + std::norm(amp.R) * dr;
  }
};

// Composite Simpson on n (even) panels of a callable, in long double.
template <typename F>
long double simpson(F&& f, long double a, long double b, long n) {
  const long double h = (b - a) / n;
  long double sum = f(a) + f(b);
  for (long i = 1; i < n; ++i) sum += (i % 2 ? 4 : 2) * f(a + i * h);
  return sum * h / 3;
}

}  // namespace oracle
