#include "dwelltime/barrier1d.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "dwelltime/errors.hpp"
#include "dwelltime/numerov.hpp"
#include "dwelltime/radial_solver.hpp"

namespace dwelltime {

Barrier1DSolution solve_barrier_1d(const PotentialSpec& potential, double energy, double mass,
                                   double target_spacing) {
  if (!(energy > 0.0)) throw DomainError("barrier transmission needs E > 0 (k = 0 is singular)");
  if (!(mass > 0.0)) throw DomainError("mass must be positive");

  const double width = potential.support_radius();
  const RadialGrid grid = RadialGrid::with_spacing(width, target_spacing);
  const double k = std::sqrt(2.0 * mass * energy);

  double q_max = 2.0 * mass * energy;
  for (Index i = 0; i < grid.size(); ++i) {
    for (Side side : {Side::below, Side::above}) {
      q_max = std::max(q_max, std::abs(2.0 * mass * (energy - potential.limit(grid[i], side))));
    }
  }
  const double ppw = 2.0 * std::numbers::pi / (std::sqrt(q_max) * grid.spacing());
  if (ppw < kMinPointsPerWavelength) {
    const auto suggested =
        static_cast<long>(std::ceil(kMinPointsPerWavelength * std::sqrt(q_max) * width / (2.0 * std::numbers::pi))) + 1;
    std::ostringstream msg;
    msg << "grid too coarse for barrier: " << ppw << " points per wavelength; use n_points >= " << suggested;
    throw ResolutionError(msg.str(), suggested);
  }

  std::vector<Index> breaks = segment_breaks(grid, potential.breakpoints());

  Barrier1DSolution sol{energy, mass, k, {}, {}, grid, VectorXcd::Zero(grid.size()),
                        VectorXcd::Zero(grid.size()), breaks, potential, target_spacing};
  const Index last = grid.size() - 1;
  const Complex outgoing = std::exp(kI * k * width);
  sol.values(last) = outgoing;
  sol.derivatives(last) = kI * k * outgoing;

  // Propagate right to left, one smooth piece at a time.
  auto x_of = [&](Index i) { return grid[i]; };
  for (std::size_t s = breaks.size() - 1; s > 0; --s) {
    const Index hi = breaks[s];
    const Index lo = breaks[s - 1];
    const double xa = grid[lo];
    const double xb = grid[hi];
    auto q = [&](double x) {
      double v;
      if (x <= xa) v = potential.limit(xa, Side::above);
      else if (x >= xb) v = potential.limit(xb, Side::below);
      else v = potential.evaluate(x);
      return Complex(2.0 * mass * (energy - v));
    };
    numerov_segment<Complex>(sol.values, sol.derivatives, hi, lo, grid.spacing(), x_of, q);
  }

  // Decompose at x = 0 into incident and reflected plane waves.
  const Complex psi0 = sol.values(0);
  const Complex dpsi0 = sol.derivatives(0);
  const Complex incident = 0.5 * (psi0 + dpsi0 / (kI * k));
  const Complex reflected = 0.5 * (psi0 - dpsi0 / (kI * k));
  sol.T = 1.0 / incident;
  sol.R = reflected / incident;
  sol.values /= incident;
  sol.derivatives /= incident;
  return sol;
}

}  // namespace dwelltime
