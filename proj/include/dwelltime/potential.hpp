#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dwelltime/types.hpp"

namespace dwelltime {

enum class PotentialKind { square_well, rectangular_barrier_1d, gaussian, woods_saxon, tabulated };

std::string to_string(PotentialKind kind);
PotentialKind potential_kind_from_string(const std::string& name);

// Finite-range potential. V(r) is exactly zero for r >= support_radius().
//
// Parameter conventions (hbar = 1):
//   square_well            V = -V0 for r < a
//   rectangular_barrier_1d V = +V0 for 0 <= x < L
//   gaussian               V = -V0 exp(-r^2 / (2 sigma^2)) for r < cutoff
//   woods_saxon            V = -V0 / (1 + exp((r - R) / diffuseness)) for r < cutoff
//   tabulated              piecewise-linear through (r_i, v_i) for r < cutoff
//
// The cutoff of the smooth kinds and the tabulated kind is the declared support
// radius; the potential is hard-truncated there.
class PotentialSpec {
 public:
  // V = 0 with unit support radius.
  PotentialSpec();

  static PotentialSpec square_well(double depth, double radius);
  static PotentialSpec rectangular_barrier(double height, double width);
  static PotentialSpec gaussian(double depth, double sigma, double cutoff);
  static PotentialSpec woods_saxon(double depth, double radius, double diffuseness, double cutoff);
  static PotentialSpec tabulated(std::vector<double> r, std::vector<double> v, double cutoff);
  static PotentialSpec tabulated(std::vector<double> r, std::vector<double> v);

  // Generic construction from a parameter map; validates names and ranges.
  static PotentialSpec from_parameters(PotentialKind kind, std::map<std::string, double> params,
                                       double support_radius, std::vector<double> r = {},
                                       std::vector<double> v = {});

  PotentialKind kind() const noexcept { return kind_; }
  const std::map<std::string, double>& parameters() const noexcept { return params_; }
  double parameter(const std::string& name) const;
  double support_radius() const noexcept { return support_; }
  const std::vector<double>& table_r() const noexcept { return table_r_; }
  const std::vector<double>& table_v() const noexcept { return table_v_; }

  double operator()(double r) const { return evaluate(r); }
  double evaluate(double r) const;

  // One-sided limit of V at r, used by integrators that restart at jumps.
  double limit(double r, Side side) const;

  // Points in (0, support_radius] where V or one of its derivatives is
  // discontinuous. Always ends with support_radius().
  std::vector<double> breakpoints() const;

  // Largest |V| on [0, support_radius], from the analytic form or the table.
  double max_abs_value() const;

  bool is_zero() const;

 private:
  struct Raw {};
  explicit PotentialSpec(Raw) {}
  void validate() const;
  double formula(double r) const;

  PotentialKind kind_ = PotentialKind::square_well;
  std::map<std::string, double> params_;
  double support_ = 0.0;
  std::vector<double> table_r_;
  std::vector<double> table_v_;
};

double evaluate(const PotentialSpec& potential, double r);
double support_radius(const PotentialSpec& potential);

void to_json(nlohmann::json& j, const PotentialSpec& potential);
PotentialSpec potential_from_json(const nlohmann::json& j);

}  // namespace dwelltime
