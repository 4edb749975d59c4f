#pragma once

// Test-only reference implementations. They share no code with the library
// routes they check.

#include <algorithm>
#include <cmath>
#include <vector>

#include "cpcell/grid.hpp"

namespace oracle {

struct XY {
  double x, y;
};

// Segment vs closed axis-aligned rectangle (Liang-Barsky, inclusive bounds).
inline bool segment_meets_box(XY a, XY b, double x0, double x1, double y0, double y1) {
  double t0 = 0.0, t1 = 1.0;
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {a.x - x0, x1 - a.x, a.y - y0, y1 - a.y};
  for (int n = 0; n < 4; ++n) {
    if (p[n] == 0.0) {
      if (q[n] < -1e-12) return false;
    } else {
      const double r = q[n] / p[n];
      if (p[n] < 0) t0 = std::max(t0, r);
      else t1 = std::min(t1, r);
    }
  }
  return t0 <= t1 + 1e-12;
}

// Area of polygon clipped to a rectangle (Sutherland-Hodgman).
inline double clipped_area(const std::vector<XY>& poly, double x0, double x1, double y0, double y1) {
  std::vector<XY> cur = poly;
  auto clip = [&](auto inside, auto cross) {
    std::vector<XY> out;
    for (std::size_t n = 0; n < cur.size(); ++n) {
      const XY a = cur[n];
      const XY b = cur[(n + 1) % cur.size()];
      const bool ia = inside(a), ib = inside(b);
      if (ia && ib) out.push_back(b);
      else if (ia && !ib) out.push_back(cross(a, b));
      else if (!ia && ib) { out.push_back(cross(a, b)); out.push_back(b); }
    }
    cur = std::move(out);
  };
  auto at_x = [](double X) {
    return [X](XY a, XY b) { const double s = (X - a.x) / (b.x - a.x); return XY{X, a.y + s * (b.y - a.y)}; };
  };
  auto at_y = [](double Y) {
    return [Y](XY a, XY b) { const double s = (Y - a.y) / (b.y - a.y); return XY{a.x + s * (b.x - a.x), Y}; };
  };
  clip([&](XY p) { return p.x >= x0; }, at_x(x0));
  if (cur.empty()) return 0.0;
  clip([&](XY p) { return p.x <= x1; }, at_x(x1));
  if (cur.empty()) return 0.0;
  clip([&](XY p) { return p.y >= y0; }, at_y(y0));
  if (cur.empty()) return 0.0;
  clip([&](XY p) { return p.y <= y1; }, at_y(y1));
  double twice = 0.0;
  for (std::size_t n = 0; n < cur.size(); ++n) {
    const XY a = cur[n], b = cur[(n + 1) % cur.size()];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * std::abs(twice);
}

struct Counts {
  std::vector<cpcell::BoxIndex> interior, frontier;
};

// Brute force over every box of the grid, in lattice units.
inline Counts classify_boxes(const std::vector<cpcell::PhasePoint>& closed, const cpcell::GridSpec& g) {
  std::vector<XY> poly;
  for (std::size_t n = 0; n + 1 < closed.size(); ++n)
    poly.push_back({g.lattice_j(closed[n].j), g.lattice_theta(closed[n].theta)});
  Counts out;
  for (std::int64_t i = 0; i < g.extent()[0]; ++i) {
    for (std::int64_t k = 0; k < g.extent()[1]; ++k) {
      const double x0 = i, x1 = i + 1, y0 = k, y1 = k + 1;
      bool touched = false;
      for (std::size_t n = 0; n < poly.size() && !touched; ++n)
        touched = segment_meets_box(poly[n], poly[(n + 1) % poly.size()], x0, x1, y0, y1);
      const double cov = clipped_area(poly, x0, x1, y0, y1);
      if (touched && cov > 1e-9) out.frontier.push_back({i, k});
      else if (!touched && cov > 0.5) out.interior.push_back({i, k});
    }
  }
  return out;
}

}  // namespace oracle
