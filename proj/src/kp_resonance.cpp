#include "dwelltime/kp_resonance.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "dwelltime/errors.hpp"
#include "dwelltime/parallel.hpp"
#include "dwelltime/quadrature.hpp"

namespace dwelltime {

namespace {

Index node_of(const RadialGrid& grid, double r0) {
  const auto node = grid.node_index(r0);
  if (!node) throw DomainError("matching radius is not a grid node");
  return *node;
}

Complex scaled_residual(const RadialSolution& sol, Index node, double k) {
  const Complex phi = sol.values(node);
  const Complex dphi = sol.derivatives(node);
  const double scale = std::max(std::abs(dphi), k * std::abs(phi));
  if (scale == 0.0) return Complex(1.0);
  return (dphi - kI * k * phi) / scale;
}

struct SecantOutcome {
  Complex W;
  double residual = 0.0;
  int iterations = 0;
  std::optional<std::string> failure;
};

// Complex secant on D(W) at fixed k, started from W0 and W0 + 1e-7 |W0|.
SecantOutcome secant(const PotentialSpec& potential, double mass, double k, double r0, const RadialGrid& grid,
                     Complex W0, Complex origin, const KpOptions& options) {
  auto D = [&](Complex W) { return kp_residual(potential, W, k, mass, r0, grid); };
  SecantOutcome out;
  Complex w_prev = W0;
  Complex d_prev = D(w_prev);
  out.W = w_prev;
  out.residual = std::abs(d_prev);
  if (out.residual < options.tolerance) return out;
  Complex w = W0 + 1e-7 * std::max(std::abs(W0), 1e-12);
  Complex d = D(w);
  for (int it = 1; it <= options.max_iterations; ++it) {
    out.W = w;
    out.residual = std::abs(d);
    out.iterations = it;
    if (!std::isfinite(out.residual)) {
      out.failure = "non-finite-residual";
      return out;
    }
    if (out.residual < options.tolerance) return out;
    const Complex slope = (d - d_prev) / (w - w_prev);
    if (slope == Complex(0.0) || !std::isfinite(std::abs(slope))) {
      out.failure = "flat-residual";
      return out;
    }
    const Complex next = w - d / slope;
    if (std::abs(next - origin) > options.trust_radius * std::abs(origin)) {
      out.W = next;
      out.failure = "left-trust-region";
      return out;
    }
    w_prev = w;
    d_prev = d;
    w = next;
    try {
      d = D(w);
    } catch (const ResolutionError&) {
      out.W = w;
      out.failure = "unresolved-energy";
      return out;
    }
  }
  out.failure = "no-convergence";
  return out;
}

ResonanceEigenpair make_eigenpair(const PotentialSpec& potential, double mass, double k, double r0,
                                  const RadialGrid& grid, const SecantOutcome& root) {
  ResonanceEigenpair pair;
  pair.W = root.W;
  pair.gamma = -2.0 * root.W.imag();
  pair.k_fixed = k;
  pair.r0 = r0;
  pair.residual_norm = root.residual;
  pair.iterations = root.iterations;
  pair.eigenfunction = integrate_radial(potential, root.W, mass, grid);
  const double n = eigen_norm(pair);
  const double scale = 1.0 / std::sqrt(n);
  pair.eigenfunction.values *= scale;
  pair.eigenfunction.derivatives *= scale;
  pair.eigenfunction.derivative_at_end *= scale;
  pair.eigenfunction.derivative_at_origin *= scale;
  return pair;
}

}  // namespace

std::string to_string(KMode mode) { return mode == KMode::probe ? "probe" : "self_consistent"; }

KMode k_mode_from_string(const std::string& name) {
  if (name == "probe") return KMode::probe;
  if (name == "self_consistent") return KMode::self_consistent;
  throw ConfigError("unknown k-mode '" + name + "' (expected self_consistent or probe)");
}

Complex kp_residual(const PotentialSpec& potential, Complex W, double k_fixed, double mass, double r0,
                    const RadialGrid& grid) {
  if (!(k_fixed > 0.0)) throw DomainError("k_fixed must be positive");
  if (r0 < potential.support_radius() * (1.0 - 1e-12)) throw DomainError("r0 inside the potential support");
  const Index node = node_of(grid, r0);
  return scaled_residual(integrate_radial(potential, W, mass, grid), node, k_fixed);
}

std::vector<ResonanceSeed> scan_resonance_seeds(const PotentialSpec& potential, double mass, double e_lo,
                                                double e_hi, int n_scan, const TimeOptions& options) {
  if (!(e_lo > 0.0) || !(e_hi > e_lo)) throw ConfigError("seed scan needs 0 < E_lo < E_hi");
  if (n_scan < 3) throw ConfigError("seed scan needs at least 3 points");
  std::vector<double> energies(n_scan);
  std::vector<double> delay(n_scan);
  for (int i = 0; i < n_scan; ++i) energies[i] = e_lo + (e_hi - e_lo) * i / (n_scan - 1);
  parallel_for(energies.size(), [&](std::size_t i) {
    delay[i] = phase_time_delay(potential, energies[i], mass, options);
  });

  constexpr double kNoiseFloor = 1e-6;
  std::vector<ResonanceSeed> seeds;
  for (int i = 1; i + 1 < n_scan; ++i) {
    if (!(delay[i] > delay[i - 1] && delay[i] >= delay[i + 1])) continue;
    if (delay[i] - std::min(delay[i - 1], delay[i + 1]) < kNoiseFloor * std::max(1.0, std::abs(delay[i]))) continue;
    if (!(delay[i] > 0.0)) continue;
    ResonanceSeed seed;
    seed.energy_peak = energies[i];
    seed.phase_delay = delay[i];
    seed.W0 = Complex(energies[i], -1.0 / delay[i]);
    seeds.push_back(seed);
  }
  return seeds;
}

KpSearchResult find_kp_eigenvalues(const PotentialSpec& potential, double mass, const std::vector<Complex>& seeds,
                                   double r0, const RadialGrid& grid, const KpOptions& options) {
  if (seeds.empty()) throw ConfigError("no resonance seeds given");
  if (options.mode == KMode::probe && !(options.k_fixed > 0.0)) {
    throw ConfigError("probe mode needs a positive k_fixed");
  }
  node_of(grid, r0);

  struct Attempt {
    std::optional<ResonanceEigenpair> pair;
    std::optional<SeedFailure> failure;
  };
  std::vector<Attempt> attempts(seeds.size());

  auto solve_seed = [&](std::size_t s) {
    const Complex seed = seeds[s];
    auto fail = [&](Complex last, double residual, std::string reason) {
      attempts[s].failure = SeedFailure{seed, last, residual, std::move(reason)};
    };
    double k = options.k_fixed;
    if (options.mode == KMode::self_consistent) {
      if (!(seed.real() > 0.0)) return fail(seed, 0.0, "nonpositive-seed-energy");
      k = std::sqrt(2.0 * mass * seed.real());
    }
    Complex start = seed;
    SecantOutcome root;
    const int outer = options.mode == KMode::self_consistent ? options.max_outer_iterations : 1;
    bool settled = false;
    for (int o = 0; o < outer; ++o) {
      root = secant(potential, mass, k, r0, grid, start, seed, options);
      if (root.failure) return fail(root.W, root.residual, *root.failure);
      if (options.mode == KMode::probe) {
        settled = true;
        break;
      }
      if (!(root.W.real() > 0.0)) return fail(root.W, root.residual, "nonpositive-energy");
      const double k_new = std::sqrt(2.0 * mass * root.W.real());
      const double change = std::abs(k_new - k) / k;
      k = k_new;
      start = root.W;
      if (change < options.outer_tolerance) {
        // Re-converge at the final k so the stored residual refers to it.
        root = secant(potential, mass, k, r0, grid, start, seed, options);
        if (root.failure) return fail(root.W, root.residual, *root.failure);
        settled = true;
        break;
      }
    }
    if (!settled) return fail(root.W, root.residual, "k-not-self-consistent");
    if (root.W.imag() > 0.0) return fail(root.W, root.residual, "growing-state");
    // With V = 0 the outgoing condition at finite r0 still has roots, but they
    // belong to the boundary, not the potential (they move with r0).
    if (potential.is_zero()) return fail(root.W, root.residual, "free-potential");
    attempts[s].pair = make_eigenpair(potential, mass, k, r0, grid, root);
  };
  parallel_for(seeds.size(), [&](std::size_t s) {
    try {
      solve_seed(s);
    } catch (const ResolutionError&) {
      attempts[s].failure = SeedFailure{seeds[s], seeds[s], 0.0, "unresolved-energy"};
    }
  });

  KpSearchResult result;
  for (auto& a : attempts) {
    if (a.failure) {
      result.failures.push_back(*a.failure);
      continue;
    }
    const auto& pair = *a.pair;
    const bool duplicate = std::any_of(result.eigenpairs.begin(), result.eigenpairs.end(), [&](const auto& p) {
      return std::abs(p.W - pair.W) < 1e-8 * std::abs(pair.W);
    });
    if (!duplicate) result.eigenpairs.push_back(pair);
  }
  std::stable_sort(result.eigenpairs.begin(), result.eigenpairs.end(),
                   [](const auto& a, const auto& b) { return a.W.real() < b.W.real(); });
  return result;
}

double eigen_norm(const ResonanceEigenpair& eigenpair) {
  const auto& sol = eigenpair.eigenfunction;
  const Index node = node_of(sol.grid, eigenpair.r0);
  const VectorXd density = sol.values.cwiseAbs2();
  return simpson_piecewise(density, sol.grid.spacing(), sol.breaks, 0, node);
}

double boundary_current(const ResonanceEigenpair& eigenpair) {
  const auto& sol = eigenpair.eigenfunction;
  const Index node = node_of(sol.grid, eigenpair.r0);
  return std::imag(std::conj(sol.values(node)) * sol.derivatives(node)) / sol.mass;
}

WidthDwellReport verify_width_dwell(const ResonanceEigenpair& eigenpair) {
  WidthDwellReport report;
  report.norm = eigen_norm(eigenpair);
  report.current = boundary_current(eigenpair);
  report.lifetime_lhs = 1.0 / eigenpair.gamma;
  report.nonphysical = !(report.current > 0.0) || !(eigenpair.gamma > 0.0);
  report.dwell_rhs = report.norm / report.current;
  report.relative_residual = std::abs(1.0 - eigenpair.gamma * report.norm / report.current);
  return report;
}

}  // namespace dwelltime
