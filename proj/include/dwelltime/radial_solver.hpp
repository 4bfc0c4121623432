#pragma once

#include <vector>

#include "dwelltime/grid.hpp"
#include "dwelltime/potential.hpp"
#include "dwelltime/types.hpp"

namespace dwelltime {

// Minimum points per local wavelength accepted by the integrators.
inline constexpr double kMinPointsPerWavelength = 20.0;

// Diagnostics recorded while integrating.
struct SolverDiagnostics {
  bool rescaled = false;             // overflow rescaling applied in a forbidden region
  bool breakpoint_off_grid = false;  // a jump or kink of V fell between nodes
  double truncation_jump = 0.0;      // |V(r0^-)|, the step left by hard truncation
  double points_per_wavelength = 0.0;
};

// phi = r Psi for the s-wave radial equation phi'' + 2m (E - V) phi = 0 at real
// or complex E, with phi(0) = 0 and phi'(0) = 1 up to the recorded
// derivative_at_origin (changed only by overflow rescaling).
struct RadialSolution {
  RadialGrid grid;
  VectorXcd values;
  VectorXcd derivatives;
  Complex derivative_at_end;
  Complex derivative_at_origin;
  Complex energy;
  double mass = 1.0;
  PotentialSpec potential;
  std::vector<Index> breaks;  // node indices delimiting smooth pieces
  SolverDiagnostics diagnostics;
};

// Integrates the radial equation on grid. Inside the support the solution is
// propagated by Numerov segment by segment, restarting at each on-grid jump or
// kink of V; outside the support V = 0 and the free solution is continued in
// closed form.
RadialSolution integrate_radial(const PotentialSpec& potential, Complex energy, double mass,
                                const RadialGrid& grid);

// Incident/scattered amplitudes of phi = (I/k) sin(kr) + S e^{ikr} at r0 and the
// phase shift delta. normalization is the factor c that turns phi into the
// unit-flux standing wave (1/sqrt(v)) [e^{-ikr} - e^{2i delta} e^{ikr}].
struct ScatteringObservables {
  double k = 0.0;
  double delta = 0.0;  // in (-pi/2, pi/2]; unwrap along scans with unwrap_phase_shifts
  Complex S_amp;
  Complex I_amp;
  double r0 = 0.0;
  Complex normalization;
  double unitarity = 1.0;  // |1 + 2ik S/I|, the modulus of e^{2i delta}
};

ScatteringObservables match_scattering(const RadialSolution& solution, double r0);

// c * phi and c * phi' with c from the observables (unit incident flux).
struct NormalizedWave {
  VectorXcd values;
  VectorXcd derivatives;
};
NormalizedWave unit_flux_wave(const RadialSolution& solution, const ScatteringObservables& obs);

// Continues a sequence of phase shifts by nearest-branch selection modulo pi.
void unwrap_phase_shifts(std::vector<double>& deltas);

// Nearest representative of value + n*period to reference.
double nearest_branch(double value, double reference, double period);

// Grid on [0, r0] with r0 a node and spacing at most target_spacing.
RadialGrid grid_to(double r0, double target_spacing);

}  // namespace dwelltime
