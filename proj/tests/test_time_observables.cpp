#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dwelltime/errors.hpp"
#include "dwelltime/time_observables.hpp"
#include "oracles.hpp"

using namespace dwelltime;

namespace {

const PotentialSpec kWell = PotentialSpec::square_well(10.0, 1.0);
const PotentialSpec kBarrier = PotentialSpec::rectangular_barrier(5.0, 1.0);

}  // namespace

TEST_CASE("free passage time over [0,5]") {
  const auto s = solve_barrier_1d(PotentialSpec::rectangular_barrier(0.0, 5.0), 0.5, 1.0);
  const auto d = dwell_time(sampled_field(s), {0.0, 5.0}, s.incident_flux());
  CHECK(std::abs(d.tau / 5.0 - 1.0) < 1e-8);
}

TEST_CASE("partial regions and endpoint snapping") {
  const auto s = solve_barrier_1d(PotentialSpec::rectangular_barrier(0.0, 5.0), 0.5, 1.0);
  const auto part = dwell_time(sampled_field(s), {1.23456, 3.5}, s.incident_flux());
  CHECK(std::abs(part.tau - (3.5 - 1.23456)) < 1e-10);
  CHECK_THROWS_AS(dwell_time(sampled_field(s), {-1.0, 2.0}, s.incident_flux()), DomainError);
}

TEST_CASE("square well interior dwell against the closed-form integral") {
  const oracle::SquareWell sw{10.0L, 1.0L, 1.0L};
  const RadialGrid grid = grid_to(1.0, 1e-3);
  const auto sol = integrate_radial(kWell, 1.0, 1.0, grid);
  const auto wave = unit_flux_wave(sol, match_scattering(sol, 1.0));
  const auto d = dwell_time(sampled_field(sol, wave.values), {0.0, 1.0}, 1.0);
  const double expected = static_cast<double>(sw.dwell_inside(1.0L));
  CHECK(std::abs(d.tau - expected) < 1e-7 * expected);
}

TEST_CASE("barrier dwell against brute-force quadrature") {
  const oracle::RectBarrier b{5.0L, 1.0L, 1.0L};
  const auto s = solve_barrier_1d(kBarrier, 2.5, 1.0);
  const auto d = dwell_time(sampled_field(s), {0.0, 1.0}, s.incident_flux());
  const double expected = static_cast<double>(b.dwell_trapezoid(2.5L));
  CHECK(std::abs(d.tau - expected) < 1e-7 * expected);
}

TEST_CASE("phase delay of the free particle vanishes") {
  CHECK(std::abs(phase_time_delay(PotentialSpec(), 1.0, 1.0)) < 1e-9);
}

TEST_CASE("phase delay against the analytic derivative") {
  const oracle::SquareWell sw{10.0L, 1.0L, 1.0L};
  for (double E : {0.3, 1.0, 3.0}) {
    const double expected = static_cast<double>(2 * sw.ddelta(E));
    CHECK(std::abs(phase_time_delay(kWell, E, 1.0) - expected) < 1e-6 * std::abs(expected));
  }
}

TEST_CASE("hard-sphere limit: deep barrier gives delta = -ka") {
  // A 1e4-high wall of radius 1 behaves as a hard sphere up to O(1/kappa).
  const auto wall = PotentialSpec::square_well(-1e4, 1.0);
  TimeOptions opts;
  opts.spacing = 1e-4;
  const double E = 1.0;
  const double kappa = std::sqrt(2.0 * (1e4 - E));
  const double k = std::sqrt(2.0 * E);
  // Exact for the finite wall: delta = atan(k tanh(kappa)/kappa) - k.
  const double ddelta = [&] {
    auto d = [&](double e) {
      const double kk = std::sqrt(2.0 * e);
      const double kap = std::sqrt(2.0 * (1e4 - e));
      return std::atan(kk * std::tanh(kap) / kap) - kk;
    };
    return (d(E + 1e-5) - d(E - 1e-5)) / 2e-5;
  }();
  CHECK(std::abs(phase_time_delay(wall, E, 1.0, opts) - 2.0 * ddelta) < 1e-6 * std::abs(2.0 * ddelta));
  CHECK(std::abs(2.0 * ddelta + 2.0 / k) < 2.0 / kappa);
}

TEST_CASE("winful decomposition for the rectangular barrier") {
  const oracle::RectBarrier b{5.0L, 1.0L, 1.0L};
  const auto s = solve_barrier_1d(kBarrier, 2.5, 1.0);
  const auto r = winful_decomposition_1d(s, 2.5, 1.0);
  CHECK(r.identity_residual < 1e-6);
  CHECK(std::abs(r.tau_dwell - static_cast<double>(b.dwell_trapezoid(2.5L))) < 1e-7);
  CHECK(std::abs(r.tau_phase - static_cast<double>(b.phase_time(2.5L))) < 1e-6);
  CHECK_FALSE(r.has_flag("identity-violated"));
  CHECK(r.self_interference == r.dwell_delay - r.phase_delay);
  CHECK(r.tau_free == 1.0 * 1.0 / s.k);
}

TEST_CASE("winful near threshold is flagged, not asserted") {
  const auto s = solve_barrier_1d(kBarrier, 0.01, 1.0);
  const auto r = winful_decomposition_1d(s, 0.01, 1.0);
  CHECK(r.has_flag("threshold-singular"));
  CHECK(std::abs(r.interference_term) > 10.0 * r.tau_dwell);
}

TEST_CASE("winful without a barrier has zero delays") {
  const auto s = solve_barrier_1d(PotentialSpec::rectangular_barrier(0.0, 1.0), 1.0, 1.0);
  const auto r = winful_decomposition_1d(s, 1.0, 1.0);
  CHECK(std::abs(r.interference_term) < 1e-12);
  CHECK(std::abs(r.dwell_delay) < 1e-10);
  CHECK(std::abs(r.phase_delay) < 1e-9);
}

TEST_CASE("smith identity for free waves and the square well") {
  const auto free = smith_identity_residual(PotentialSpec(), 1.0, 1.0, grid_to(1.0, 1e-3), 1e-4);
  CHECK(free.max_norm < 1e-6);

  const auto s = smith_identity_residual(kWell, 1.0, 1.0, grid_to(1.0, 1e-3), 1e-4);
  CHECK(s.max_norm < 1e-5);
  CHECK(std::abs(s.integrated_density - s.boundary_term) < 1e-6);

  // Residual is dominated by the O(h^2) energy difference.
  const auto coarse = smith_identity_residual(kWell, 1.0, 1.0, grid_to(1.0, 1e-3), 2e-3);
  const auto fine = smith_identity_residual(kWell, 1.0, 1.0, grid_to(1.0, 1e-3), 1e-3);
  CHECK(coarse.max_norm / fine.max_norm > 3.9);
}

TEST_CASE("outgoing-wave dwell equals the phase delay") {
  const auto zero = outgoing_dwell_equals_phase(PotentialSpec(), 1.0, 1.0, 1.0);
  CHECK(std::abs(zero.lhs) < 1e-9);
  CHECK(std::abs(zero.rhs) < 1e-9);
  CHECK(std::abs(outgoing_dwell_equals_phase(kWell, 1.0, 1.0, 1.0).difference) < 1e-6);
  for (int i = 0; i <= 20; ++i) {
    const double E = 0.8 + 0.06 * i;
    CHECK(std::abs(outgoing_dwell_equals_phase(kWell, E, 1.0, 1.0).difference) < 1e-6);
  }
}

TEST_CASE("log-derivative dwell equals phase delay plus free time") {
  const auto free = kp_log_derivative_dwell(PotentialSpec(), 1.0, 1.0, 1.0);
  CHECK(std::abs(free.tau - 1.0 / std::sqrt(2.0)) < 1e-9);
  CHECK(std::abs(free.imaginary_part) < 1e-9);

  const double v = std::sqrt(2.0);
  const auto kp = kp_log_derivative_dwell(kWell, 1.0, 1.0, 1.0);
  CHECK(std::abs(kp.tau - (phase_time_delay(kWell, 1.0, 1.0) + 1.0 / v)) < 1e-6);

  // At the phase-delay maximum the report's dwell and phase times coincide.
  double best = 0.0;
  double best_e = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double E = 0.1 + 0.04 * i;
    const double d = phase_time_delay(kWell, E, 1.0);
    if (d > best) {
      best = d;
      best_e = E;
    }
  }
  const auto report = radial_time_report(kWell, best_e, 1.0);
  CHECK(std::abs(report.tau_dwell - report.tau_phase) < 1e-6);
}

TEST_CASE("radial report bookkeeping") {
  const auto r = radial_time_report(kWell, 2.0, 1.0);
  CHECK(r.tau_free == 1.0 / std::sqrt(4.0));
  CHECK(r.self_interference == r.dwell_delay - r.phase_delay);
  CHECK(r.region.x2 == 1.0);
}
