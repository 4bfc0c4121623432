#pragma once

#include <vector>

#include "dwelltime/grid.hpp"
#include "dwelltime/potential.hpp"
#include "dwelltime/types.hpp"

namespace dwelltime {

// Stationary scattering through a barrier occupying [0, L] (L = support
// radius) for a unit-amplitude plane wave incident from the left:
//   x < 0:  e^{ikx} + R e^{-ikx}
//   x > L:  T e^{ikx}
// values/derivatives hold Psi on the grid over [0, L].
struct Barrier1DSolution {
  double energy = 0.0;
  double mass = 1.0;
  double k = 0.0;
  Complex R;
  Complex T;
  RadialGrid grid;
  VectorXcd values;
  VectorXcd derivatives;
  std::vector<Index> breaks;
  PotentialSpec potential;
  double target_spacing = 1e-3;

  double incident_flux() const { return k / mass; }
};

Barrier1DSolution solve_barrier_1d(const PotentialSpec& potential, double energy, double mass,
                                   double target_spacing = 1e-3);

}  // namespace dwelltime
