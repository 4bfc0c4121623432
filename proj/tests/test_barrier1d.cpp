#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dwelltime/barrier1d.hpp"
#include "oracles.hpp"

using namespace dwelltime;

TEST_CASE("no barrier transmits fully") {
  const auto s = solve_barrier_1d(PotentialSpec::rectangular_barrier(0.0, 1.0), 1.0, 1.0);
  CHECK(std::abs(s.R) < 1e-12);
  CHECK(std::abs(s.T - 1.0) < 1e-12);
}

TEST_CASE("transmission matches the closed form below, at and above the top") {
  const oracle::RectBarrier b{5.0L, 1.0L, 1.0L};
  const auto pot = PotentialSpec::rectangular_barrier(5.0, 1.0);
  const auto below = solve_barrier_1d(pot, 2.5, 1.0);
  CHECK(std::abs(std::norm(below.T) - static_cast<double>(b.transmission(2.5L))) < 1e-10);
  const auto top = solve_barrier_1d(pot, 5.0, 1.0);
  CHECK(std::abs(std::norm(top.T) - static_cast<double>(b.transmission(5.0L))) < 1e-8);
  const auto above = solve_barrier_1d(pot, 8.0, 1.0);
  CHECK(std::abs(std::norm(above.T) - static_cast<double>(b.transmission(8.0L))) < 1e-10);
}

TEST_CASE("complex amplitudes match the matching-condition solve") {
  const oracle::RectBarrier b{5.0L, 1.0L, 1.0L};
  const auto pot = PotentialSpec::rectangular_barrier(5.0, 1.0);
  for (double E : {0.3, 2.5, 7.0}) {
    const auto s = solve_barrier_1d(pot, E, 1.0);
    const auto amp = b.amplitudes(E);
    CHECK(std::abs(s.R - Complex(static_cast<double>(amp.R.real()), static_cast<double>(amp.R.imag()))) < 1e-9);
    CHECK(std::abs(s.T - Complex(static_cast<double>(amp.T.real()), static_cast<double>(amp.T.imag()))) < 1e-9);
    const Index mid = s.grid.size() / 2;
    const auto psi = b.psi_inside(amp, s.grid[mid]);
    CHECK(std::abs(s.values(mid) - Complex(static_cast<double>(psi.real()), static_cast<double>(psi.imag()))) < 1e-9);
  }
}

TEST_CASE("flux is conserved") {
  const auto pot = PotentialSpec::gaussian(-3.0, 0.4, 2.0);
  for (double E : {0.2, 1.0, 4.0}) {
    const auto s = solve_barrier_1d(pot, E, 1.0);
    CHECK(std::abs(std::norm(s.R) + std::norm(s.T) - 1.0) < 1e-10);
  }
}
