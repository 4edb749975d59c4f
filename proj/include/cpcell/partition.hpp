#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cpcell/grid.hpp"

namespace cpcell {

/// Closed axis-aligned domain [lo.j, hi.j] x [lo.theta, hi.theta]. Infinite
/// bounds are allowed and are clipped to the lattice window.
struct Domain {
  PhasePoint lo;
  PhasePoint hi;

  /// Action interval [a, b] spanning every angle.
  static Domain action_interval(double a, double b);
  /// Angle interval [a, b] spanning every action.
  static Domain angle_interval(double a, double b);
};

/// Cubic smoothstep 3s^2 - 2s^3 clamped to [0, 1].
double smoothstep(double s);

/// Smooth weights B_i with sum 1 on the lattice window. Each B_i is 1 on D_i
/// away from its frontier zone and 0 outside D_i widened by half the frontier
/// width. Every edge inside the window carries a smoothstep ramp of width
/// `frontier_width` centred on it.
class PartitionOfUnity {
 public:
  const std::vector<Domain>& domains() const { return domains_; }
  double frontier_width() const { return frontier_width_; }
  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return domains_.size(); }

  /// B_i(p).
  double weight(std::size_t i, PhasePoint p) const;
  /// All weights at p.
  std::vector<double> weights(PhasePoint p) const;

 private:
  friend PartitionOfUnity build_partition(std::vector<Domain>, double, const GridSpec&);
  double raw(std::size_t i, PhasePoint p) const;

  std::vector<Domain> domains_;
  double frontier_width_ = 0.0;
  GridSpec grid_;
};

/// Throws FrontierTooNarrow when frontier_width is below the smaller box width
/// and GapBetweenDomains when the domains leave part of the window uncovered.
PartitionOfUnity build_partition(std::vector<Domain> domains, double frontier_width, const GridSpec& grid);

}  // namespace cpcell
