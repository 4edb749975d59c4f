#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <vector>

#include "cpcell/error.hpp"

namespace cpcell {

/// A point of the two dimensional phase space. `j` runs along the action axis
/// (lattice index i), `theta` along the angle axis (lattice index k).
struct PhasePoint {
  double j = 0.0;
  double theta = 0.0;
  friend bool operator==(const PhasePoint&, const PhasePoint&) = default;
};

/// The fixed lattice of boxes. Each box has volume delta_j * delta_theta, which
/// is the effective quantum of action of the lattice.
class GridSpec {
 public:
  GridSpec() = default;
  /// Throws InvalidGrid unless delta_j * delta_theta == hbar_eff (relative 1e-12)
  /// and both extents are >= 1.
  GridSpec(double delta_j, double delta_theta, double hbar_eff, PhasePoint origin,
           std::array<std::int64_t, 2> extent);

  /// Square-ish lattice for a given quantum. `aspect` is delta_j / delta_theta,
  /// `multiplier` scales the box volume to N0 * hbar, `half_box` selects the
  /// hbar/2 uncertainty-box convention.
  static GridSpec from_hbar(double hbar, PhasePoint origin, std::array<std::int64_t, 2> extent,
                            double aspect = 1.0, int multiplier = 1, bool half_box = false);

  /// Smallest lattice with the given box widths whose window covers
  /// [lo, hi] on both axes. The origin is snapped to a multiple of the box width.
  static GridSpec covering(double delta_j, double delta_theta, PhasePoint lo, PhasePoint hi);

  double delta_j() const { return delta_j_; }
  double delta_theta() const { return delta_theta_; }
  double hbar_eff() const { return hbar_eff_; }
  double box_volume() const { return hbar_eff_; }
  PhasePoint origin() const { return origin_; }
  std::array<std::int64_t, 2> extent() const { return extent_; }

  /// Upper corner of the lattice window.
  PhasePoint upper() const;
  bool contains(PhasePoint p) const;

  /// Lattice coordinates: box (i, k) spans [i, i+1] x [k, k+1].
  double lattice_j(double j) const { return (j - origin_.j) / delta_j_; }
  double lattice_theta(double theta) const { return (theta - origin_.theta) / delta_theta_; }
  PhasePoint box_center(std::int64_t i, std::int64_t k) const;

  /// Same box widths, window grown to include [lo, hi]. Keeps the lattice lines.
  GridSpec expanded_to(PhasePoint lo, PhasePoint hi) const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  double delta_j_ = 1.0;
  double delta_theta_ = 1.0;
  double hbar_eff_ = 1.0;
  PhasePoint origin_{};
  std::array<std::int64_t, 2> extent_{1, 1};
};

struct BoxIndex {
  std::int64_t i = 0;
  std::int64_t k = 0;
  friend auto operator<=>(const BoxIndex&, const BoxIndex&) = default;
};

/// Closed simply connected region, stored as a counterclockwise closed polyline
/// (first vertex repeated at the end).
class Region {
 public:
  /// Throws InvalidRegion if the polyline is not closed, has fewer than three
  /// distinct vertices or is clockwise.
  explicit Region(std::vector<PhasePoint> boundary);

  static Region rectangle(PhasePoint lo, double height_j, double width_theta);

  const std::vector<PhasePoint>& boundary() const { return boundary_; }
  double area() const;
  PhasePoint centroid() const;

 private:
  std::vector<PhasePoint> boundary_;
};

/// Shoelace area of a closed polyline; positive when counterclockwise in (j, theta).
double signed_area(std::span<const PhasePoint> closed);
/// Area centroid of a closed polyline.
PhasePoint polygon_centroid(std::span<const PhasePoint> closed);

/// A rasterized cell: interior boxes C and frontier boxes Sigma. Both lists are
/// sorted and disjoint.
struct Cell {
  GridSpec grid;
  std::vector<BoxIndex> interior;
  std::vector<BoxIndex> frontier;

  bool is_interior(BoxIndex b) const;
  bool is_frontier(BoxIndex b) const;
  bool covers(PhasePoint p) const;
  double interior_volume() const { return static_cast<double>(interior.size()) * grid.box_volume(); }
  double frontier_volume() const { return static_cast<double>(frontier.size()) * grid.box_volume(); }
};

/// Frontier: boxes whose closed rectangle meets the boundary and which overlap
/// the region with positive area. Interior: remaining boxes inside the region.
Cell rasterize(const Region& region, const GridSpec& grid);

/// Same as rasterize for an already-validated closed polyline. Used by the
/// advection code, whose images may carry millions of vertices.
Cell rasterize_polyline(std::span<const PhasePoint> closed, const GridSpec& grid);

/// Graininess coefficient vol(Sigma) / vol(C). Throws OmegaUndefined when C is empty.
double omega(const Cell& cell);

}  // namespace cpcell
