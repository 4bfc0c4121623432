#include <cmath>

#include "dwelltime/errors.hpp"
#include "dwelltime/grid.hpp"
#include "dwelltime/quadrature.hpp"

namespace dwelltime {

RadialGrid::RadialGrid(double r_max, Index n_points) : r_max_(r_max), n_points_(n_points) {
  if (!(r_max > 0.0) || !std::isfinite(r_max)) throw ConfigError("grid r_max must be positive");
  if (n_points < 2) throw ConfigError("grid needs at least 2 points");
  spacing_ = r_max / static_cast<double>(n_points - 1);
}

RadialGrid RadialGrid::with_spacing(double r_max, double target_spacing) {
  if (!(target_spacing > 0.0)) throw ConfigError("grid spacing must be positive");
  const double intervals = std::ceil(r_max / target_spacing - 1e-9);
  return RadialGrid(r_max, static_cast<Index>(std::max(1.0, intervals)) + 1);
}

std::optional<Index> RadialGrid::node_index(double r) const {
  const double x = r / spacing_;
  const double nearest = std::round(x);
  if (std::abs(x - nearest) > 1e-9 || nearest < 0.0 || nearest > static_cast<double>(n_points_ - 1)) {
    return std::nullopt;
  }
  return static_cast<Index>(nearest);
}

Index RadialGrid::floor_index(double r) const {
  if (auto node = node_index(r)) return *node;
  const double x = std::floor(r / spacing_);
  return std::clamp(static_cast<Index>(x), Index{0}, n_points_ - 1);
}

VectorXd RadialGrid::nodes() const {
  VectorXd out(n_points_);
  for (Index i = 0; i < n_points_; ++i) out(i) = (*this)[i];
  return out;
}

std::vector<Index> segment_breaks(const RadialGrid& grid, const std::vector<double>& break_points) {
  std::vector<Index> breaks{0, grid.size() - 1};
  for (double p : break_points) {
    if (auto node = grid.node_index(p)) breaks.push_back(*node);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  return breaks;
}

VectorXd simpson_weights(Index n, double h, const std::vector<Index>& breaks) {
  VectorXd w = VectorXd::Zero(n);
  std::vector<Index> cuts(breaks.begin(), breaks.end());
  cuts.push_back(0);
  cuts.push_back(n - 1);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const Index a = cuts[s];
    const Index b = cuts[s + 1];
    const Index m = b - a;
    if (m == 1) {
      w(a) += 0.5 * h;
      w(b) += 0.5 * h;
      continue;
    }
    Index simpson_end = b;
    if (m % 2 == 1) {
      simpson_end = b - 3;
      const double c = 3.0 * h / 8.0;
      w(simpson_end) += c;
      w(simpson_end + 1) += 3.0 * c;
      w(simpson_end + 2) += 3.0 * c;
      w(b) += c;
    }
    if (simpson_end > a) {
      const double c = h / 3.0;
      w(a) += c;
      w(simpson_end) += c;
      for (Index i = a + 1; i < simpson_end; ++i) w(i) += ((i - a) % 2 == 1 ? 4.0 : 2.0) * c;
    }
  }
  return w;
}

}  // namespace dwelltime
