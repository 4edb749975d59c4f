#pragma once

#include <functional>
#include <vector>

#include "cpcell/grid.hpp"

namespace cpcell {

struct Polyline {
  std::vector<PhasePoint> points;
  /// Closed polylines repeat the first point at the end.
  bool closed = false;
};

/// Marching-squares contours of h = value on the lattice corners of `window`,
/// with linear interpolation along box edges. Saddle boxes are resolved by the
/// sign of h at the box centre. Returns an empty list when no box edge crosses
/// the value.
std::vector<Polyline> extract_level_set(const std::function<double(PhasePoint)>& h, double value,
                                        const GridSpec& window);

}  // namespace cpcell
