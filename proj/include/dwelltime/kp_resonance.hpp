#pragma once

#include <string>
#include <vector>

#include "dwelltime/grid.hpp"
#include "dwelltime/potential.hpp"
#include "dwelltime/radial_solver.hpp"
#include "dwelltime/time_observables.hpp"
#include "dwelltime/types.hpp"

// Kapur-Peierls states: phi'' + 2m (W - V) phi = 0 with phi(0) = 0 and the
// outgoing condition phi'(r0) = i k phi(r0) at a fixed real k.
namespace dwelltime {

enum class KMode {
  self_consistent,  // k <- sqrt(2m Re W) until stationary
  probe,            // k supplied by the caller
};

std::string to_string(KMode mode);
KMode k_mode_from_string(const std::string& name);

struct ResonanceSeed {
  double energy_peak = 0.0;
  double phase_delay = 0.0;  // 2 d delta/dE at the peak
  Complex W0;
};

struct ResonanceEigenpair {
  Complex W;
  double gamma = 0.0;  // -2 Im W
  double k_fixed = 0.0;
  RadialSolution eigenfunction;  // scaled to int_0^{r0} |phi|^2 = 1
  double r0 = 0.0;
  double residual_norm = 0.0;  // scaled |D(W)|
  int iterations = 0;
};

struct SeedFailure {
  Complex seed;
  Complex last_W;
  double residual_norm = 0.0;
  std::string reason;  // "no-convergence", "left-trust-region", "growing-state", ...
};

struct KpOptions {
  KMode mode = KMode::self_consistent;
  double k_fixed = 0.0;  // probe mode only
  int max_iterations = 50;
  double tolerance = 1e-10;
  int max_outer_iterations = 30;
  double outer_tolerance = 1e-10;
  // Converged roots farther than trust_radius * |W0| from their seed are
  // attributed to a different state and the seed is reported failed.
  double trust_radius = 0.75;
};

struct KpSearchResult {
  std::vector<ResonanceEigenpair> eigenpairs;  // sorted by Re W
  std::vector<SeedFailure> failures;
};

// Scaled boundary residual D(W) = [phi'(r0) - i k phi(r0)] / max(|phi'(r0)|, k |phi(r0)|).
Complex kp_residual(const PotentialSpec& potential, Complex W, double k_fixed, double mass, double r0,
                    const RadialGrid& grid);

// Local maxima of the phase delay over [e_lo, e_hi] on n_scan points, each
// with the seed W0 = E_peak - i / (2 d delta/dE).
std::vector<ResonanceSeed> scan_resonance_seeds(const PotentialSpec& potential, double mass, double e_lo,
                                                double e_hi, int n_scan, const TimeOptions& options = {});

KpSearchResult find_kp_eigenvalues(const PotentialSpec& potential, double mass, const std::vector<Complex>& seeds,
                                   double r0, const RadialGrid& grid, const KpOptions& options = {});

struct WidthDwellReport {
  double lifetime_lhs = 0.0;  // 1 / Gamma
  double dwell_rhs = 0.0;     // N / j(r0)
  double relative_residual = 0.0;  // |1 - Gamma N / j(r0)|
  double norm = 0.0;
  double current = 0.0;
  bool nonphysical = false;  // j(r0) <= 0
};

// Norm over [0, r0] of phi on the grid of the eigenfunction.
double eigen_norm(const ResonanceEigenpair& eigenpair);
// (1/m) Im(phi* phi') at r0.
double boundary_current(const ResonanceEigenpair& eigenpair);

WidthDwellReport verify_width_dwell(const ResonanceEigenpair& eigenpair);

}  // namespace dwelltime
