#pragma once

#include <optional>
#include <vector>

#include "dwelltime/types.hpp"

namespace dwelltime {

// Uniform grid on [0, r_max] with n_points nodes; both ends are nodes.
class RadialGrid {
 public:
  RadialGrid() : RadialGrid(1.0, 2) {}
  RadialGrid(double r_max, Index n_points);

  // Smallest node count whose spacing does not exceed target_spacing.
  static RadialGrid with_spacing(double r_max, double target_spacing);

  double r_max() const noexcept { return r_max_; }
  Index n_points() const noexcept { return n_points_; }
  Index size() const noexcept { return n_points_; }
  double spacing() const noexcept { return spacing_; }

  double operator[](Index i) const noexcept {
    return i == n_points_ - 1 ? r_max_ : static_cast<double>(i) * spacing_;
  }

  // Index of the node at r, if r lies on the grid within 1e-9 of a spacing.
  std::optional<Index> node_index(double r) const;

  // Index of the last node with r_i <= r.
  Index floor_index(double r) const;

  VectorXd nodes() const;

 private:
  double r_max_;
  Index n_points_;
  double spacing_;
};

// Node indices that split a grid into pieces on which sampled functions are
// smooth. Always contains 0 and size()-1, sorted and unique.
std::vector<Index> segment_breaks(const RadialGrid& grid, const std::vector<double>& break_points);

}  // namespace dwelltime
