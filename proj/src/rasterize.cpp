// Exact-coverage rasterization of a closed polyline onto the box lattice.
//
// Coverage is accumulated per action row with the signed-area scheme used by
// font rasterizers: every boundary piece inside box (i, k) deposits the area to
// its right within that box, and a prefix sum along k carries the full row
// height to the boxes further right. Boxes touched by the closed boundary are
// tracked separately so that boundary lines lying exactly on lattice lines are
// handled with closed-box semantics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "cpcell/grid.hpp"

namespace cpcell {
namespace {

constexpr double kSnap = 1e-9;
constexpr double kCoverageEps = 1e-9;

double snap(double x) {
  const double r = std::round(x);
  return std::abs(x - r) < kSnap ? r : x;
}

bool is_integer(double x) { return x == std::floor(x); }

struct LatticePoint {
  double u;
  double w;
};

class CoverageBuffer {
 public:
  CoverageBuffer(std::int64_t i0, std::int64_t k0, std::int64_t rows, std::int64_t cols)
      : i0_(i0), k0_(k0), rows_(rows), cols_(cols),
        acc_(static_cast<std::size_t>(rows * (cols + 1)), 0.0),
        touched_(static_cast<std::size_t>(rows * cols), 0) {}

  void deposit(std::int64_t i, std::int64_t k, double du, double w_mid) {
    const auto r = i - i0_;
    const auto c = k - k0_;
    if (r < 0 || r >= rows_ || c < 0 || c >= cols_) return;
    const double here = du * (static_cast<double>(k + 1) - w_mid);
    acc_[idx_acc(r, c)] += here;
    acc_[idx_acc(r, c + 1)] += du - here;
  }

  void touch(std::int64_t i, std::int64_t k) {
    const auto r = i - i0_;
    const auto c = k - k0_;
    if (r < 0 || r >= rows_ || c < 0 || c >= cols_) return;
    touched_[static_cast<std::size_t>(r * cols_ + c)] = 1;
  }

  Cell finish(const GridSpec& grid, double orientation) {
    Cell cell{grid, {}, {}};
    for (std::int64_t r = 0; r < rows_; ++r) {
      double running = 0.0;
      for (std::int64_t c = 0; c < cols_; ++c) {
        running += acc_[idx_acc(r, c)];
        const double coverage = orientation * running;
        const bool touched = touched_[static_cast<std::size_t>(r * cols_ + c)] != 0;
        const BoxIndex box{i0_ + r, k0_ + c};
        if (touched) {
          if (coverage > kCoverageEps) cell.frontier.push_back(box);
        } else if (coverage > 0.5) {
          cell.interior.push_back(box);
        }
      }
    }
    return cell;
  }

 private:
  std::size_t idx_acc(std::int64_t r, std::int64_t c) const {
    return static_cast<std::size_t>(r * (cols_ + 1) + c);
  }

  std::int64_t i0_, k0_, rows_, cols_;
  std::vector<double> acc_;
  std::vector<unsigned char> touched_;
};

// Rows (or columns) whose closed extent contains coordinate x.
void closed_span(double x, std::int64_t& lo, std::int64_t& hi) {
  const auto f = static_cast<std::int64_t>(std::floor(x));
  lo = is_integer(x) ? f - 1 : f;
  hi = f;
}

void touch_point(CoverageBuffer& buf, LatticePoint p) {
  std::int64_t i_lo, i_hi, k_lo, k_hi;
  closed_span(p.u, i_lo, i_hi);
  closed_span(p.w, k_lo, k_hi);
  for (auto i = i_lo; i <= i_hi; ++i)
    for (auto k = k_lo; k <= k_hi; ++k) buf.touch(i, k);
}

struct Breakpoint {
  double s;
  LatticePoint p;
};

void process_edge(CoverageBuffer& buf, LatticePoint a, LatticePoint b, std::vector<Breakpoint>& scratch) {
  scratch.clear();
  scratch.push_back({0.0, a});
  scratch.push_back({1.0, b});
  const double du = b.u - a.u;
  const double dw = b.w - a.w;
  if (du != 0.0) {
    const double lo = std::min(a.u, b.u);
    const double hi = std::max(a.u, b.u);
    for (double x = std::floor(lo) + 1.0; x < hi; x += 1.0) {
      const double s = (x - a.u) / du;
      scratch.push_back({s, {x, snap(a.w + s * dw)}});
    }
  }
  if (dw != 0.0) {
    const double lo = std::min(a.w, b.w);
    const double hi = std::max(a.w, b.w);
    for (double x = std::floor(lo) + 1.0; x < hi; x += 1.0) {
      const double s = (x - a.w) / dw;
      scratch.push_back({s, {snap(a.u + s * du), x}});
    }
  }
  std::sort(scratch.begin(), scratch.end(), [](const Breakpoint& l, const Breakpoint& r) { return l.s < r.s; });

  for (std::size_t n = 0; n < scratch.size(); ++n) {
    touch_point(buf, scratch[n].p);
    if (n + 1 == scratch.size()) break;
    const LatticePoint p = scratch[n].p;
    const LatticePoint q = scratch[n + 1].p;
    const double u_mid = 0.5 * (p.u + q.u);
    const double w_mid = 0.5 * (p.w + q.w);
    std::int64_t i_lo, i_hi, k_lo, k_hi;
    if (p.u == q.u) {
      closed_span(p.u, i_lo, i_hi);
    } else {
      i_lo = i_hi = static_cast<std::int64_t>(std::floor(u_mid));
    }
    if (p.w == q.w) {
      closed_span(p.w, k_lo, k_hi);
    } else {
      k_lo = k_hi = static_cast<std::int64_t>(std::floor(w_mid));
    }
    for (auto i = i_lo; i <= i_hi; ++i)
      for (auto k = k_lo; k <= k_hi; ++k) buf.touch(i, k);

    const double piece_du = q.u - p.u;
    if (piece_du != 0.0) {
      buf.deposit(static_cast<std::int64_t>(std::floor(u_mid)), static_cast<std::int64_t>(std::floor(w_mid)),
                  piece_du, w_mid);
    }
  }
}

}  // namespace

Cell rasterize_polyline(std::span<const PhasePoint> closed, const GridSpec& grid) {
  if (closed.size() < 4) {
    throw Error(ErrorCode::InvalidRegion, "a closed polyline needs at least three distinct vertices");
  }
  std::vector<LatticePoint> pts;
  pts.reserve(closed.size());
  double u_min = INFINITY, u_max = -INFINITY, w_min = INFINITY, w_max = -INFINITY;
  for (const auto& p : closed) {
    if (!grid.contains(p)) {
      throw Error(ErrorCode::RegionOutsideGrid, "boundary vertex outside the lattice window");
    }
    const LatticePoint lp{snap(grid.lattice_j(p.j)), snap(grid.lattice_theta(p.theta))};
    u_min = std::min(u_min, lp.u);
    u_max = std::max(u_max, lp.u);
    w_min = std::min(w_min, lp.w);
    w_max = std::max(w_max, lp.w);
    pts.push_back(lp);
  }
  const auto ext = grid.extent();
  const auto i0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(u_min)) - 1);
  const auto k0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(w_min)) - 1);
  const auto i1 = std::min<std::int64_t>(ext[0] - 1, static_cast<std::int64_t>(std::floor(u_max)) + 1);
  const auto k1 = std::min<std::int64_t>(ext[1] - 1, static_cast<std::int64_t>(std::floor(w_max)) + 1);

  CoverageBuffer buf(i0, k0, i1 - i0 + 1, k1 - k0 + 1);
  std::vector<Breakpoint> scratch;
  double twice_area = 0.0;
  for (std::size_t n = 0; n + 1 < pts.size(); ++n) {
    process_edge(buf, pts[n], pts[n + 1], scratch);
    twice_area += pts[n].u * pts[n + 1].w - pts[n + 1].u * pts[n].w;
  }
  return buf.finish(grid, twice_area >= 0.0 ? 1.0 : -1.0);
}

}  // namespace cpcell
