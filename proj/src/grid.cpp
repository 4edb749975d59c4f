#include "cpcell/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace cpcell {

GridSpec::GridSpec(double delta_j, double delta_theta, double hbar_eff, PhasePoint origin,
                   std::array<std::int64_t, 2> extent)
    : delta_j_(delta_j), delta_theta_(delta_theta), hbar_eff_(hbar_eff), origin_(origin), extent_(extent) {
  if (!(delta_j > 0.0) || !(delta_theta > 0.0) || !(hbar_eff > 0.0) || !std::isfinite(delta_j) ||
      !std::isfinite(delta_theta)) {
    throw Error(ErrorCode::InvalidGrid, "box widths and hbar_eff must be positive and finite");
  }
  if (std::abs(delta_j * delta_theta - hbar_eff) > 1e-12 * hbar_eff) {
    std::ostringstream os;
    os << "box volume " << delta_j * delta_theta << " differs from hbar_eff " << hbar_eff;
    throw Error(ErrorCode::InvalidGrid, os.str());
  }
  if (extent[0] < 1 || extent[1] < 1) {
    throw Error(ErrorCode::InvalidGrid, "extent components must be >= 1");
  }
}

GridSpec GridSpec::from_hbar(double hbar, PhasePoint origin, std::array<std::int64_t, 2> extent,
                             double aspect, int multiplier, bool half_box) {
  if (!(hbar > 0.0) || !(aspect > 0.0) || multiplier < 1) {
    throw Error(ErrorCode::InvalidGrid, "hbar, aspect must be positive and multiplier >= 1");
  }
  const double volume = hbar * multiplier * (half_box ? 0.5 : 1.0);
  const double dj = std::sqrt(volume * aspect);
  const double dth = volume / dj;
  return GridSpec(dj, dth, dj * dth, origin, extent);
}

GridSpec GridSpec::covering(double delta_j, double delta_theta, PhasePoint lo, PhasePoint hi) {
  if (!(delta_j > 0.0) || !(delta_theta > 0.0)) {
    throw Error(ErrorCode::InvalidGrid, "box widths must be positive");
  }
  const PhasePoint origin{std::floor(lo.j / delta_j) * delta_j, std::floor(lo.theta / delta_theta) * delta_theta};
  const auto nj = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil((hi.j - origin.j) / delta_j)));
  const auto nth =
      std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil((hi.theta - origin.theta) / delta_theta)));
  return GridSpec(delta_j, delta_theta, delta_j * delta_theta, origin, {nj, nth});
}

PhasePoint GridSpec::upper() const {
  return {origin_.j + static_cast<double>(extent_[0]) * delta_j_,
          origin_.theta + static_cast<double>(extent_[1]) * delta_theta_};
}

bool GridSpec::contains(PhasePoint p) const {
  constexpr double tol = 1e-9;
  const double u = lattice_j(p.j);
  const double w = lattice_theta(p.theta);
  return u >= -tol && w >= -tol && u <= static_cast<double>(extent_[0]) + tol &&
         w <= static_cast<double>(extent_[1]) + tol;
}

PhasePoint GridSpec::box_center(std::int64_t i, std::int64_t k) const {
  return {origin_.j + (static_cast<double>(i) + 0.5) * delta_j_,
          origin_.theta + (static_cast<double>(k) + 0.5) * delta_theta_};
}

GridSpec GridSpec::expanded_to(PhasePoint lo, PhasePoint hi) const {
  const auto lo_i = std::min<std::int64_t>(0, static_cast<std::int64_t>(std::floor(lattice_j(lo.j))));
  const auto lo_k = std::min<std::int64_t>(0, static_cast<std::int64_t>(std::floor(lattice_theta(lo.theta))));
  const auto hi_i = std::max<std::int64_t>(extent_[0], static_cast<std::int64_t>(std::ceil(lattice_j(hi.j))));
  const auto hi_k =
      std::max<std::int64_t>(extent_[1], static_cast<std::int64_t>(std::ceil(lattice_theta(hi.theta))));
  const PhasePoint origin{origin_.j + static_cast<double>(lo_i) * delta_j_,
                          origin_.theta + static_cast<double>(lo_k) * delta_theta_};
  return GridSpec(delta_j_, delta_theta_, hbar_eff_, origin, {hi_i - lo_i, hi_k - lo_k});
}

double signed_area(std::span<const PhasePoint> closed) {
  if (closed.size() < 2) return 0.0;
  double twice = 0.0;
  for (std::size_t n = 0; n + 1 < closed.size(); ++n) {
    twice += closed[n].j * closed[n + 1].theta - closed[n + 1].j * closed[n].theta;
  }
  return 0.5 * twice;
}

PhasePoint polygon_centroid(std::span<const PhasePoint> closed) {
  double cj = 0.0;
  double cth = 0.0;
  double twice = 0.0;
  for (std::size_t n = 0; n + 1 < closed.size(); ++n) {
    const auto& a = closed[n];
    const auto& b = closed[n + 1];
    const double cross = a.j * b.theta - b.j * a.theta;
    twice += cross;
    cj += (a.j + b.j) * cross;
    cth += (a.theta + b.theta) * cross;
  }
  return {cj / (3.0 * twice), cth / (3.0 * twice)};
}

Region::Region(std::vector<PhasePoint> boundary) : boundary_(std::move(boundary)) {
  if (boundary_.size() < 4) {
    throw Error(ErrorCode::InvalidRegion, "a closed polyline needs at least three distinct vertices");
  }
  const auto& first = boundary_.front();
  const auto& last = boundary_.back();
  if (first.j != last.j || first.theta != last.theta) {
    throw Error(ErrorCode::InvalidRegion, "first vertex must equal last vertex");
  }
  for (const auto& p : boundary_) {
    if (!std::isfinite(p.j) || !std::isfinite(p.theta)) {
      throw Error(ErrorCode::InvalidRegion, "non-finite vertex");
    }
  }
  if (!(signed_area(boundary_) > 0.0)) {
    throw Error(ErrorCode::InvalidRegion, "boundary must be counterclockwise with positive area");
  }
}

Region Region::rectangle(PhasePoint lo, double height_j, double width_theta) {
  return Region({lo,
                 {lo.j + height_j, lo.theta},
                 {lo.j + height_j, lo.theta + width_theta},
                 {lo.j, lo.theta + width_theta},
                 lo});
}

double Region::area() const { return signed_area(boundary_); }

PhasePoint Region::centroid() const { return polygon_centroid(boundary_); }

bool Cell::is_interior(BoxIndex b) const { return std::binary_search(interior.begin(), interior.end(), b); }

bool Cell::is_frontier(BoxIndex b) const { return std::binary_search(frontier.begin(), frontier.end(), b); }

bool Cell::covers(PhasePoint p) const {
  const BoxIndex b{static_cast<std::int64_t>(std::floor(grid.lattice_j(p.j))),
                   static_cast<std::int64_t>(std::floor(grid.lattice_theta(p.theta)))};
  return is_interior(b) || is_frontier(b);
}

double omega(const Cell& cell) {
  if (cell.interior.empty()) {
    throw Error(ErrorCode::OmegaUndefined, "cell has no interior boxes");
  }
  return cell.frontier_volume() / cell.interior_volume();
}

Cell rasterize(const Region& region, const GridSpec& grid) {
  if (region.area() < grid.box_volume() * (1.0 - 1e-9)) {
    throw Error(ErrorCode::DegenerateRegion, "region area is smaller than one box");
  }
  return rasterize_polyline(region.boundary(), grid);
}

}  // namespace cpcell
