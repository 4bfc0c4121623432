#pragma once

#include <string>
#include <vector>

#include "dwelltime/barrier1d.hpp"
#include "dwelltime/grid.hpp"
#include "dwelltime/potential.hpp"
#include "dwelltime/radial_solver.hpp"
#include "dwelltime/types.hpp"

// Time observables with hbar = 1: every "2 hbar d delta/dE" is 2 d delta/dE and
// times are in units of (length unit) * (mass unit) / (momentum unit).
namespace dwelltime {

struct TimeOptions {
  double spacing = 1e-3;        // radial/1D grid spacing
  double rel_step = 1e-4;       // energy step h/E for derivatives
  double e_min = 0.05;          // threshold guard for the 1D interference term
  double r0 = 0.0;              // matching radius; 0 selects the support radius
  double winful_tolerance = 1e-6;
};

struct Region {
  double x1 = 0.0;
  double x2 = 0.0;
};

// Wave field sampled on a uniform grid x_i = origin + i * spacing.
struct SampledField {
  double origin = 0.0;
  double spacing = 0.0;
  VectorXcd values;
  std::vector<Index> breaks;
};

SampledField sampled_field(const Barrier1DSolution& barrier);
SampledField sampled_field(const RadialSolution& solution, const VectorXcd& values);

struct DwellResult {
  double tau = 0.0;
  double quadrature_error = 0.0;
  bool endpoints_snapped = false;
};

// Integral of |Psi|^2 over the region divided by the incident flux.
DwellResult dwell_time(const SampledField& field, Region region, double incident_flux);

struct TimeReport {
  double energy = 0.0;
  double tau_dwell = 0.0;
  double tau_phase = 0.0;
  double tau_free = 0.0;
  double dwell_delay = 0.0;
  double phase_delay = 0.0;
  double self_interference = 0.0;  // dwell_delay - phase_delay
  Region region;
  double interference_term = 0.0;  // -Im(R)/k dk/dE (1D only)
  double identity_residual = 0.0;  // |tau_phase - tau_dwell - interference_term| (1D only)
  std::vector<std::string> flags;

  bool has_flag(const std::string& flag) const;
};

// Phase shift at the matching radius, in (-pi/2, pi/2].
double phase_shift(const PotentialSpec& potential, double energy, double mass,
                   const TimeOptions& options = {});

// Wigner phase-time delay 2 d delta/dE from five-point differences with one
// Richardson step.
double phase_time_delay(const PotentialSpec& potential, double energy, double mass,
                        const TimeOptions& options = {});

// Dwell time, weighted phase time and interference term for a 1D barrier.
TimeReport winful_decomposition_1d(const Barrier1DSolution& barrier, double energy, double mass,
                                   const TimeOptions& options = {});

struct SmithResidual {
  VectorXd field;          // |L(x)| on the grid
  double max_norm = 0.0;
  double integrated_density = 0.0;  // int_0^{r_max} |Psi|^2
  double boundary_term = 0.0;       // -(1/2m) (Psi* dPsi_E/dx - dPsi/dE dPsi*/dx) at r_max
  double energy_step = 0.0;
};

// Pointwise residual of |Psi|^2 = -(1/2m) d/dx (Psi* d^2Psi/dxdE - dPsi/dE dPsi*/dx)
// for the unit-flux scattering state, with the energy derivative from a
// central difference at E +- h, h = rel_step * E.
SmithResidual smith_identity_residual(const PotentialSpec& potential, double energy, double mass,
                                      const RadialGrid& grid, double rel_step = 1e-4);

struct OutgoingReport {
  double lhs = 0.0;         // boundary expression minus r0/v
  double rhs = 0.0;         // 2 d delta/dE
  double difference = 0.0;  // lhs - rhs
};

// Evaluates the boundary expression with only the outgoing wave
// (1/sqrt(v)) e^{2i delta} e^{ikx} at r0 and compares the resulting dwell delay
// with the phase delay.
OutgoingReport outgoing_dwell_equals_phase(const PotentialSpec& potential, double energy, double mass,
                                           double r0, const TimeOptions& options = {});

struct KpDwell {
  double tau = 0.0;             // Re[-i d/dE ln phi(r0)]
  double imaginary_part = 0.0;  // must vanish when the outgoing normalization holds
};

// Dwell time -i d/dE ln phi(r0) with phi normalized so that its outgoing
// component at r0 equals e^{2i delta} e^{ikr0}.
KpDwell kp_log_derivative_dwell(const PotentialSpec& potential, double energy, double mass, double r0,
                                const TimeOptions& options = {});

// Radial time report: tau_dwell from the log-derivative route, tau_phase from
// the phase shift, tau_free = m r0 / k.
TimeReport radial_time_report(const PotentialSpec& potential, double energy, double mass,
                              const TimeOptions& options = {});

}  // namespace dwelltime
