#include "dwelltime/radial_solver.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "dwelltime/errors.hpp"
#include "dwelltime/numerov.hpp"

namespace dwelltime {

namespace {

// Potential restricted to the closed segment [lo, hi], taking the inward
// one-sided limit at each end.
double segment_potential(const PotentialSpec& potential, double x, double lo, double hi) {
  if (x <= lo) return potential.limit(lo, Side::above);
  if (x >= hi) return potential.limit(hi, Side::below);
  return potential.evaluate(x);
}

double max_local_wavenumber(const PotentialSpec& potential, Complex energy, double mass,
                            double r_max) {
  double q_max = std::abs(2.0 * mass * energy);
  const double support = potential.support_radius();
  const double probe = std::min(support, r_max);
  const int samples = 2000;
  for (int i = 0; i <= samples; ++i) {
    const double r = probe * i / samples;
    for (Side side : {Side::below, Side::above}) {
      q_max = std::max(q_max, std::abs(2.0 * mass * (energy - potential.limit(r, side))));
    }
  }
  for (double b : potential.breakpoints()) {
    q_max = std::max(q_max, std::abs(2.0 * mass * (energy - potential.limit(b, Side::below))));
  }
  return std::sqrt(q_max);
}

template <typename Scalar>
void integrate_interior(const PotentialSpec& potential, Scalar energy, double mass, const RadialGrid& grid,
                        const std::vector<Index>& interior_breaks, double support,
                        VectorX<Scalar>& y, VectorX<Scalar>& dy, SolverDiagnostics& diag,
                        WaveState<Scalar>& at_support) {
  const double h = grid.spacing();
  auto x_of = [&](Index i) { return grid[i]; };
  y.setZero(grid.size());
  dy.setZero(grid.size());
  y(0) = Scalar(0.0);
  dy(0) = Scalar(1.0);

  Index lo = 0;
  for (Index b : interior_breaks) {
    const double xa = grid[lo];
    const double xb = grid[b];
    auto q = [&](double x) { return Scalar(2.0 * mass) * (energy - segment_potential(potential, x, xa, xb)); };
    diag.rescaled |= numerov_segment<Scalar>(y, dy, lo, b, h, x_of, q);
    lo = b;
  }
  if (grid[lo] < support) {
    // Support radius between nodes: finish with RK4 from the last node.
    const double xa = grid[lo];
    auto q = [&](double x) { return Scalar(2.0 * mass) * (energy - segment_potential(potential, x, xa, support)); };
    at_support = rk4_propagate<Scalar>(q, xa, support, WaveState<Scalar>{y(lo), dy(lo)}, 16);
  } else {
    at_support = {y(lo), dy(lo)};
  }
}

}  // namespace

RadialGrid grid_to(double r0, double target_spacing) { return RadialGrid::with_spacing(r0, target_spacing); }

RadialSolution integrate_radial(const PotentialSpec& potential, Complex energy, double mass,
                                const RadialGrid& grid) {
  if (!(mass > 0.0)) throw DomainError("mass must be positive");
  const double support = potential.support_radius();
  if (grid.r_max() < support * (1.0 - 1e-12)) {
    throw ConfigError("grid r_max is smaller than the potential support radius");
  }

  SolverDiagnostics diag;
  const double k_max = max_local_wavenumber(potential, energy, mass, grid.r_max());
  diag.points_per_wavelength =
      k_max > 0.0 ? 2.0 * std::numbers::pi / (k_max * grid.spacing()) : std::numeric_limits<double>::infinity();
  if (diag.points_per_wavelength < kMinPointsPerWavelength) {
    const auto suggested = static_cast<long>(
        std::ceil(kMinPointsPerWavelength * k_max * grid.r_max() / (2.0 * std::numbers::pi))) + 1;
    std::ostringstream msg;
    msg << "grid too coarse: " << diag.points_per_wavelength
        << " points per local wavelength (need 20); use n_points >= " << suggested;
    throw ResolutionError(msg.str(), suggested);
  }
  diag.truncation_jump = std::abs(potential.limit(support, Side::below));

  // Interior breakpoints that fall on nodes restart the propagation; the last
  // one is the support radius itself when it lies on the grid.
  std::vector<Index> interior_breaks;
  for (double b : potential.breakpoints()) {
    if (auto node = grid.node_index(b)) {
      if (*node > 0) interior_breaks.push_back(*node);
    } else {
      diag.breakpoint_off_grid = true;
    }
  }
  const Index last_interior = grid.floor_index(support);
  while (!interior_breaks.empty() && interior_breaks.back() > last_interior) interior_breaks.pop_back();
  if (interior_breaks.empty() || interior_breaks.back() != last_interior) interior_breaks.push_back(last_interior);

  RadialSolution sol{grid, {}, {}, {}, {}, energy, mass, potential, {}, diag};
  WaveState<Complex> at_support{};
  if (energy.imag() == 0.0) {
    // Real energies run in extended precision: energy derivatives of phi are
    // taken by differencing nearby solves, which amplifies recurrence roundoff.
    using Wide = long double;
    VectorX<Wide> y;
    VectorX<Wide> dy;
    WaveState<Wide> s{};
    integrate_interior<Wide>(potential, static_cast<Wide>(energy.real()), mass, grid, interior_breaks, support, y,
                             dy, sol.diagnostics, s);
    sol.values = y.cast<double>().cast<Complex>();
    sol.derivatives = dy.cast<double>().cast<Complex>();
    at_support = {static_cast<double>(s.value), static_cast<double>(s.derivative)};
  } else {
    integrate_interior<Complex>(potential, energy, mass, grid, interior_breaks, support, sol.values,
                                sol.derivatives, sol.diagnostics, at_support);
  }

  // V = 0 beyond the support: continue with the free solution in closed form.
  const Complex kappa = std::sqrt(2.0 * mass * energy);
  for (Index i = last_interior + 1; i < grid.size(); ++i) {
    const double t = grid[i] - support;
    if (std::abs(kappa) * t < 1e-300 || kappa == Complex(0.0)) {
      sol.values(i) = at_support.value + at_support.derivative * t;
      sol.derivatives(i) = at_support.derivative;
      continue;
    }
    const Complex c = std::cos(kappa * t);
    const Complex s = std::sin(kappa * t);
    sol.values(i) = at_support.value * c + at_support.derivative * s / kappa;
    sol.derivatives(i) = -at_support.value * kappa * s + at_support.derivative * c;
  }

  sol.breaks = interior_breaks;
  sol.breaks.insert(sol.breaks.begin(), 0);
  if (sol.breaks.back() != grid.size() - 1) sol.breaks.push_back(grid.size() - 1);
  sol.derivative_at_end = sol.derivatives(grid.size() - 1);
  sol.derivative_at_origin = sol.derivatives(0);
  return sol;
}

ScatteringObservables match_scattering(const RadialSolution& solution, double r0) {
  if (solution.energy.imag() != 0.0 || !(solution.energy.real() > 0.0)) {
    throw DomainError("match_scattering needs a solution at real positive energy");
  }
  if (r0 < solution.potential.support_radius() * (1.0 - 1e-12)) {
    throw DomainError("matching radius lies inside the potential support");
  }
  const auto node = solution.grid.node_index(r0);
  if (!node) throw DomainError("matching radius is not a grid node");

  const double k = std::sqrt(2.0 * solution.mass * solution.energy.real());
  const Complex phi = solution.values(*node);
  const Complex dphi = solution.derivatives(*node);
  const double r = solution.grid[*node];

  ScatteringObservables obs;
  obs.k = k;
  obs.r0 = r;
  obs.I_amp = std::exp(kI * k * r) * (dphi - kI * k * phi);
  obs.S_amp = std::cos(k * r) * phi - std::sin(k * r) / k * dphi;
  if (std::abs(obs.I_amp) < 1e-14 * std::abs(obs.S_amp)) {
    throw MatchingError("no incident wave at real energy (pure outgoing state); use kp_resonance");
  }
  const Complex s_matrix = 1.0 + 2.0 * kI * k * obs.S_amp / obs.I_amp;
  obs.unitarity = std::abs(s_matrix);
  obs.delta = 0.5 * std::arg(s_matrix);
  if (obs.delta <= -0.5 * std::numbers::pi) obs.delta += std::numbers::pi;
  const double velocity = k / solution.mass;
  obs.normalization = -2.0 * kI * k / (std::sqrt(velocity) * obs.I_amp);
  return obs;
}

NormalizedWave unit_flux_wave(const RadialSolution& solution, const ScatteringObservables& obs) {
  return {solution.values * obs.normalization, solution.derivatives * obs.normalization};
}

double nearest_branch(double value, double reference, double period) {
  return value - period * std::round((value - reference) / period);
}

void unwrap_phase_shifts(std::vector<double>& deltas) {
  for (std::size_t i = 1; i < deltas.size(); ++i) {
    deltas[i] = nearest_branch(deltas[i], deltas[i - 1], std::numbers::pi);
  }
}

}  // namespace dwelltime
