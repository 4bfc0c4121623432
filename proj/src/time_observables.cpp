#include "dwelltime/time_observables.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "dwelltime/errors.hpp"
#include "dwelltime/quadrature.hpp"

namespace dwelltime {

namespace {

constexpr double kPi = std::numbers::pi;

// Cubic Lagrange interpolant of f through nodes j0..j0+3 at fractional index s.
double cubic_at(const VectorXd& f, Index j0, double s) {
  double sum = 0.0;
  for (Index a = 0; a < 4; ++a) {
    double w = 1.0;
    for (Index b = 0; b < 4; ++b) {
      if (b != a) w *= (s - static_cast<double>(j0 + b)) / static_cast<double>(a - b);
    }
    sum += w * f(j0 + a);
  }
  return sum;
}

// Integral of f over fractional indices [s0, s1] (same grid interval or
// adjacent), using a cubic through the four nearest nodes of the smooth piece
// [lo, hi] and three-point Gauss-Legendre.
double partial_integral(const VectorXd& f, double h, Index lo, Index hi, double s0, double s1) {
  if (s1 <= s0) return 0.0;
  const double mid = 0.5 * (s0 + s1);
  Index j0 = static_cast<Index>(std::floor(mid)) - 1;
  if (hi - lo < 3) {
    // Piece too short for a cubic: linear interpolation.
    const Index a = std::clamp<Index>(static_cast<Index>(std::floor(mid)), lo, hi - 1);
    auto lin = [&](double s) { return f(a) + (f(a + 1) - f(a)) * (s - static_cast<double>(a)); };
    return 0.5 * (lin(s0) + lin(s1)) * (s1 - s0) * h;
  }
  j0 = std::clamp<Index>(j0, lo, hi - 3);
  static constexpr std::array<double, 3> nodes{-0.7745966692414834, 0.0, 0.7745966692414834};
  static constexpr std::array<double, 3> weights{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  const double half = 0.5 * (s1 - s0);
  double sum = 0.0;
  for (std::size_t g = 0; g < 3; ++g) sum += weights[g] * cubic_at(f, j0, mid + half * nodes[g]);
  return sum * half * h;
}

// Simpson with the 3/8 panel at the front instead of the back; the difference
// from simpson() estimates the error on pieces with an odd interval count.
double simpson_front(const VectorXd& f, double h, Index i0, Index i1) {
  if (i1 - i0 < 3) return simpson(f, h, i0, i1);
  return 3.0 * h / 8.0 * (f(i0) + 3.0 * f(i0 + 1) + 3.0 * f(i0 + 2) + f(i0 + 3)) + simpson(f, h, i0 + 3, i1);
}

double piece_error(const VectorXd& f, double h, Index a, Index b) {
  const Index m = b - a;
  if (m < 4) return 0.0;
  const double fine = simpson(f, h, a, b);
  if (m % 2 == 1) return std::abs(fine - simpson_front(f, h, a, b));
  if (m % 4 != 0) {
    // Coarse rule needs an even count at 2h; drop to the 3/8 comparison instead.
    return std::abs(fine - simpson_front(f, h, a, b - 1) - simpson(f, h, b - 1, b));
  }
  VectorXd coarse(m / 2 + 1);
  for (Index i = 0; i <= m / 2; ++i) coarse(i) = f(a + 2 * i);
  return std::abs(fine - simpson(coarse, 2.0 * h)) / 15.0;
}

double delta_at(const PotentialSpec& potential, double energy, double mass, double r0, double spacing) {
  const RadialGrid grid = grid_to(r0, spacing);
  return match_scattering(integrate_radial(potential, energy, mass, grid), r0).delta;
}

double matching_radius(const PotentialSpec& potential, const TimeOptions& options) {
  const double r0 = options.r0 > 0.0 ? options.r0 : potential.support_radius();
  if (!(r0 > 0.0)) throw DomainError("matching radius must be positive");
  return r0;
}

// Offsets (in units of h) at which a five-point stencil at h and at h/2 need values.
constexpr std::array<double, 7> kStencil{-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0};

// d g/dE by five-point differences at h and h/2 plus one Richardson step, g
// sampled at E + kStencil * h and already continued onto one branch.
template <typename T>
T richardson_derivative(const std::array<T, 7>& g, double h) {
  const T coarse = (g[0] - 8.0 * g[1] + 8.0 * g[5] - g[6]) / (12.0 * h);
  const double hh = 0.5 * h;
  const T fine = (g[1] - 8.0 * g[2] + 8.0 * g[4] - g[5]) / (12.0 * hh);
  return richardson4(coarse, fine);
}

// Samples a phase-like function on the stencil, continues it by nearest
// branch modulo period and checks that no jump remains.
template <typename Fn>
std::array<double, 7> branch_continued(Fn&& fn, double energy, double h, double period, bool& jumped) {
  std::array<double, 7> g{};
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = fn(energy + kStencil[i] * h);
  const double ref = g[3];
  for (double& v : g) v = nearest_branch(v, ref, period);
  jumped = false;
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    if (std::abs(g[i + 1] - g[i]) > 0.25 * period) jumped = true;
  }
  return g;
}

// Derivative of a branch-continued phase with one retry at a shrunk stencil.
template <typename Fn>
double phase_derivative(Fn&& fn, double energy, double rel_step, double period) {
  double h = rel_step * energy;
  for (int attempt = 0; attempt < 2; ++attempt) {
    if (energy - 2.0 * h <= 0.0) throw DomainError("energy lies within the differentiation stencil of 0");
    bool jumped = false;
    const auto g = branch_continued(fn, energy, h, period, jumped);
    if (!jumped) return richardson_derivative(g, h);
    h *= 0.1;
  }
  throw BranchError("phase branch jump inside the differentiation stencil");
}

}  // namespace

bool TimeReport::has_flag(const std::string& flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

SampledField sampled_field(const Barrier1DSolution& barrier) {
  return {0.0, barrier.grid.spacing(), barrier.values, barrier.breaks};
}

SampledField sampled_field(const RadialSolution& solution, const VectorXcd& values) {
  return {0.0, solution.grid.spacing(), values, solution.breaks};
}

DwellResult dwell_time(const SampledField& field, Region region, double incident_flux) {
  if (!(incident_flux > 0.0)) throw DomainError("incident flux must be positive");
  const Index n = field.values.size();
  const double h = field.spacing;
  if (n < 2 || !(h > 0.0)) throw DomainError("field needs at least two nodes");
  const double x_end = field.origin + static_cast<double>(n - 1) * h;
  const double slack = 1e-9 * h;
  if (region.x1 > region.x2 || region.x1 < field.origin - slack || region.x2 > x_end + slack) {
    throw DomainError("dwell region outside the sampled grid");
  }

  const VectorXd density = field.values.cwiseAbs2();
  std::vector<Index> cuts(field.breaks.begin(), field.breaks.end());
  cuts.push_back(0);
  cuts.push_back(n - 1);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const double s1 = std::clamp((region.x1 - field.origin) / h, 0.0, static_cast<double>(n - 1));
  const double s2 = std::clamp((region.x2 - field.origin) / h, 0.0, static_cast<double>(n - 1));
  auto snap = [](double s) {
    const double r = std::round(s);
    return std::abs(s - r) < 1e-9 ? r : s;
  };
  const double a = snap(s1);
  const double b = snap(s2);

  DwellResult result;
  result.endpoints_snapped = a != std::round(a) || b != std::round(b);
  const Index i_lo = static_cast<Index>(std::ceil(a));
  const Index i_hi = static_cast<Index>(std::floor(b));

  auto piece_of = [&](double s) {
    auto it = std::upper_bound(cuts.begin(), cuts.end(), static_cast<Index>(std::floor(s)));
    const Index hi = it == cuts.end() ? cuts.back() : *it;
    const Index lo = *(it - 1);
    return std::pair<Index, Index>{lo, std::max(hi, lo + 1)};
  };

  double integral = 0.0;
  if (i_lo > i_hi) {
    const auto [lo, hi] = piece_of(a);
    integral = partial_integral(density, h, lo, hi, a, b);
  } else {
    if (i_hi > i_lo) {
      integral += simpson_piecewise(density, h, cuts, i_lo, i_hi);
      Index lo = i_lo;
      for (Index c : cuts) {
        if (c <= lo) continue;
        if (c >= i_hi) break;
        result.quadrature_error += piece_error(density, h, lo, c);
        lo = c;
      }
      result.quadrature_error += piece_error(density, h, lo, i_hi);
    }
    if (a < static_cast<double>(i_lo)) {
      const auto [lo, hi] = piece_of(a);
      integral += partial_integral(density, h, lo, hi, a, static_cast<double>(i_lo));
    }
    if (b > static_cast<double>(i_hi)) {
      const auto [lo, hi] = piece_of(static_cast<double>(i_hi));
      integral += partial_integral(density, h, lo, hi, static_cast<double>(i_hi), b);
    }
  }
  result.tau = integral / incident_flux;
  result.quadrature_error /= incident_flux;
  return result;
}

double phase_shift(const PotentialSpec& potential, double energy, double mass, const TimeOptions& options) {
  return delta_at(potential, energy, mass, matching_radius(potential, options), options.spacing);
}

double phase_time_delay(const PotentialSpec& potential, double energy, double mass, const TimeOptions& options) {
  if (!(energy > 0.0)) throw DomainError("phase time needs E > 0");
  const double r0 = matching_radius(potential, options);
  auto delta = [&](double e) { return delta_at(potential, e, mass, r0, options.spacing); };
  return 2.0 * phase_derivative(delta, energy, options.rel_step, kPi);
}

TimeReport winful_decomposition_1d(const Barrier1DSolution& barrier, double energy, double mass,
                                   const TimeOptions& options) {
  if (std::abs(barrier.energy - energy) > 1e-14 * std::abs(energy) || barrier.mass != mass) {
    throw DomainError("barrier solution was computed at a different energy or mass");
  }
  const double width = barrier.grid.r_max();
  const double k = barrier.k;

  TimeReport report;
  report.energy = energy;
  report.region = {0.0, width};
  report.tau_free = mass * width / k;
  report.tau_dwell = dwell_time(sampled_field(barrier), report.region, barrier.incident_flux()).tau;

  const double t2 = std::norm(barrier.T);
  const double r2 = std::norm(barrier.R);
  auto solve = [&](double e) { return solve_barrier_1d(barrier.potential, e, mass, barrier.target_spacing); };
  auto theta_t = [&](double e) {
    const auto s = solve(e);
    return std::arg(s.T) + s.k * width;
  };
  const double dtheta_t = phase_derivative(theta_t, energy, options.rel_step, 2.0 * kPi);
  double dtheta_r = 0.0;
  if (r2 > 1e-24) {
    auto theta_r = [&](double e) { return std::arg(solve(e).R); };
    dtheta_r = phase_derivative(theta_r, energy, options.rel_step, 2.0 * kPi);
  }
  report.tau_phase = t2 * dtheta_t + r2 * dtheta_r;

  const double dk_de = mass / k;
  report.interference_term = -barrier.R.imag() / k * dk_de;
  report.identity_residual = std::abs(report.tau_phase - report.tau_dwell - report.interference_term);
  report.dwell_delay = report.tau_dwell - report.tau_free;
  report.phase_delay = report.tau_phase - report.tau_free;
  report.self_interference = report.dwell_delay - report.phase_delay;
  if (energy < options.e_min) {
    report.flags.emplace_back("threshold-singular");
  } else if (report.identity_residual > options.winful_tolerance) {
    report.flags.emplace_back("identity-violated");
  }
  return report;
}

SmithResidual smith_identity_residual(const PotentialSpec& potential, double energy, double mass,
                                      const RadialGrid& grid, double rel_step) {
  if (!(energy > 0.0)) throw DomainError("Smith identity needs E > 0");
  const double h = rel_step * energy;
  const double r_max = grid.r_max();
  auto wave = [&](double e) {
    const RadialSolution sol = integrate_radial(potential, e, mass, grid);
    return std::pair{sol, unit_flux_wave(sol, match_scattering(sol, r_max))};
  };
  const auto [sol, psi] = wave(energy);
  const auto plus = wave(energy + h).second;
  const auto minus = wave(energy - h).second;

  const VectorXcd psi_e = (plus.values - minus.values) / (2.0 * h);
  const VectorXcd dpsi_e = (plus.derivatives - minus.derivatives) / (2.0 * h);
  const VectorXcd g = psi.values.conjugate().cwiseProduct(dpsi_e) - psi_e.cwiseProduct(psi.derivatives.conjugate());
  const VectorXcd dg = differentiate(g, grid.spacing(), sol.breaks);
  const VectorXd density = psi.values.cwiseAbs2();

  SmithResidual out;
  out.energy_step = h;
  out.field = (density.cast<Complex>() + dg / (2.0 * mass)).cwiseAbs();
  out.max_norm = out.field.maxCoeff();
  out.integrated_density = simpson_piecewise(density, grid.spacing(), sol.breaks, 0, grid.size() - 1);
  out.boundary_term = (-g(grid.size() - 1) / (2.0 * mass)).real();
  return out;
}

OutgoingReport outgoing_dwell_equals_phase(const PotentialSpec& potential, double energy, double mass,
                                           double r0, const TimeOptions& options) {
  if (r0 < potential.support_radius() * (1.0 - 1e-12)) throw DomainError("r0 inside the potential support");
  if (!(energy > 0.0)) throw DomainError("outgoing check needs E > 0");
  const double h = options.rel_step * energy;
  if (energy - 2.0 * h <= 0.0) throw DomainError("energy lies within the differentiation stencil of 0");

  // Psi = v^{-1/2} e^{2i delta} e^{ikx} and dPsi/dx = ik Psi at x = r0.
  std::array<double, 7> deltas{};
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    deltas[i] = delta_at(potential, energy + kStencil[i] * h, mass, r0, options.spacing);
  }
  for (double& d : deltas) d = nearest_branch(d, deltas[3], kPi);
  auto psi_at = [&](std::size_t i) {
    const double e = energy + kStencil[i] * h;
    const double k = std::sqrt(2.0 * mass * e);
    return std::exp(kI * (2.0 * deltas[i] + k * r0)) / std::sqrt(k / mass);
  };
  std::array<Complex, 7> psi{};
  std::array<Complex, 7> dpsi{};
  for (std::size_t i = 0; i < psi.size(); ++i) {
    psi[i] = psi_at(i);
    dpsi[i] = kI * std::sqrt(2.0 * mass * (energy + kStencil[i] * h)) * psi[i];
  }
  const Complex psi_e = richardson_derivative(psi, h);
  const Complex dpsi_e = richardson_derivative(dpsi, h);
  const Complex boundary = -(std::conj(psi[3]) * dpsi_e - psi_e * std::conj(dpsi[3])) / (2.0 * mass);

  const double v = std::sqrt(2.0 * energy / mass);
  OutgoingReport report;
  report.lhs = boundary.real() - r0 / v;
  TimeOptions at_r0 = options;
  at_r0.r0 = r0;
  report.rhs = phase_time_delay(potential, energy, mass, at_r0);
  report.difference = report.lhs - report.rhs;
  return report;
}

KpDwell kp_log_derivative_dwell(const PotentialSpec& potential, double energy, double mass, double r0,
                                const TimeOptions& options) {
  if (!(energy > 0.0)) throw DomainError("log-derivative dwell time needs E > 0");
  const double h = options.rel_step * energy;
  if (energy - 2.0 * h <= 0.0) throw DomainError("energy lies within the differentiation stencil of 0");
  const RadialGrid grid = grid_to(r0, options.spacing);

  // ln phi(r0) with phi scaled so that its outgoing part is e^{2i delta} e^{ikr0}:
  // phi = in e^{-ikr} + out e^{ikr} near r0, so -out/in is e^{2i delta}.
  std::array<double, 7> log_mod{};
  std::array<double, 7> phase{};
  for (std::size_t i = 0; i < kStencil.size(); ++i) {
    const double e = energy + kStencil[i] * h;
    const double k = std::sqrt(2.0 * mass * e);
    const RadialSolution sol = integrate_radial(potential, e, mass, grid);
    const Index last = grid.size() - 1;
    const Complex phi = sol.values(last);
    const Complex dphi = sol.derivatives(last);
    if (std::abs(phi) < 1e-12 * std::max(1.0, std::abs(dphi) / k)) {
      throw MatchingError("phi(r0) vanishes at a stencil energy; choose a different r0");
    }
    const Complex out = 0.5 * (phi + dphi / (kI * k)) * std::exp(-kI * k * r0);
    const Complex in = 0.5 * (phi - dphi / (kI * k)) * std::exp(kI * k * r0);
    if (std::abs(in) < 1e-14 * std::abs(out)) throw MatchingError("no incident wave at real energy");
    const Complex scaled = -out / in * std::exp(kI * k * r0);
    log_mod[i] = std::log(std::abs(scaled));
    phase[i] = std::arg(scaled);
  }
  for (double& p : phase) p = nearest_branch(p, phase[3], 2.0 * kPi);
  for (std::size_t i = 0; i + 1 < phase.size(); ++i) {
    if (std::abs(phase[i + 1] - phase[i]) > 0.5 * kPi) throw BranchError("phase jump inside the stencil");
  }
  // -i d/dE (a + i b) = b' - i a'
  KpDwell result;
  result.tau = richardson_derivative(phase, h);
  result.imaginary_part = -richardson_derivative(log_mod, h);
  return result;
}

TimeReport radial_time_report(const PotentialSpec& potential, double energy, double mass,
                              const TimeOptions& options) {
  const double r0 = matching_radius(potential, options);
  TimeOptions at_r0 = options;
  at_r0.r0 = r0;
  const double k = std::sqrt(2.0 * mass * energy);

  TimeReport report;
  report.energy = energy;
  report.region = {0.0, r0};
  report.tau_free = mass * r0 / k;
  const KpDwell dwell = kp_log_derivative_dwell(potential, energy, mass, r0, at_r0);
  report.tau_dwell = dwell.tau;
  report.phase_delay = phase_time_delay(potential, energy, mass, at_r0);
  report.tau_phase = report.phase_delay + report.tau_free;
  report.dwell_delay = report.tau_dwell - report.tau_free;
  report.self_interference = report.dwell_delay - report.phase_delay;
  if (std::abs(dwell.imaginary_part) > 1e-6 * std::max(1.0, std::abs(dwell.tau))) {
    report.flags.emplace_back("imaginary-dwell");
  }
  return report;
}

}  // namespace dwelltime
