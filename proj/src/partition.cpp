#include "cpcell/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cpcell {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool inside_closed(const Domain& d, PhasePoint p) {
  return p.j >= d.lo.j && p.j <= d.hi.j && p.theta >= d.lo.theta && p.theta <= d.hi.theta;
}

double ramp_up(double x, double edge, double w) { return smoothstep((x - (edge - 0.5 * w)) / w); }
double ramp_down(double x, double edge, double w) { return smoothstep(((edge + 0.5 * w) - x) / w); }

std::vector<double> breakpoints(double lo, double hi, const std::vector<Domain>& domains, bool action) {
  std::vector<double> out{lo, hi};
  for (const auto& d : domains) {
    for (double v : {action ? d.lo.j : d.lo.theta, action ? d.hi.j : d.hi.theta}) {
      if (v > lo && v < hi) out.push_back(v);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

Domain Domain::action_interval(double a, double b) { return {{a, -kInf}, {b, kInf}}; }
Domain Domain::angle_interval(double a, double b) { return {{-kInf, a}, {kInf, b}}; }

double smoothstep(double s) {
  s = std::clamp(s, 0.0, 1.0);
  return s * s * (3.0 - 2.0 * s);
}

double PartitionOfUnity::raw(std::size_t i, PhasePoint p) const {
  const Domain& d = domains_[i];
  const PhasePoint lo = grid_.origin(), hi = grid_.upper();
  const double w = frontier_width_;
  double v = 1.0;
  if (d.lo.j > lo.j) v *= ramp_up(p.j, d.lo.j, w);
  if (d.hi.j < hi.j) v *= ramp_down(p.j, d.hi.j, w);
  if (d.lo.theta > lo.theta) v *= ramp_up(p.theta, d.lo.theta, w);
  if (d.hi.theta < hi.theta) v *= ramp_down(p.theta, d.hi.theta, w);
  return v;
}

std::vector<double> PartitionOfUnity::weights(PhasePoint p) const {
  std::vector<double> out(domains_.size());
  double total = 0.0;
  for (std::size_t i = 0; i < domains_.size(); ++i) {
    out[i] = raw(i, p);
    total += out[i];
  }
  if (!(total > 0.0)) throw Error(ErrorCode::InvalidArgument, "point lies outside every domain and frontier zone");
  for (auto& v : out) v /= total;
  return out;
}

double PartitionOfUnity::weight(std::size_t i, PhasePoint p) const {
  if (i >= domains_.size()) throw Error(ErrorCode::InvalidArgument, "domain index out of range");
  return weights(p)[i];
}

PartitionOfUnity build_partition(std::vector<Domain> domains, double frontier_width, const GridSpec& grid) {
  if (domains.empty()) throw Error(ErrorCode::InvalidArgument, "partition needs at least one domain");
  for (const auto& d : domains) {
    if (std::isnan(d.lo.j) || std::isnan(d.hi.j) || std::isnan(d.lo.theta) || std::isnan(d.hi.theta) ||
        !(d.lo.j < d.hi.j) || !(d.lo.theta < d.hi.theta)) {
      throw Error(ErrorCode::InvalidArgument, "domain bounds must satisfy lo < hi");
    }
  }
  if (!std::isfinite(frontier_width) || frontier_width < std::min(grid.delta_j(), grid.delta_theta())) {
    throw Error(ErrorCode::FrontierTooNarrow, "frontier zone is narrower than one box");
  }
  const PhasePoint lo = grid.origin(), hi = grid.upper();
  const auto js = breakpoints(lo.j, hi.j, domains, true);
  const auto ts = breakpoints(lo.theta, hi.theta, domains, false);
  for (std::size_t a = 0; a + 1 < js.size(); ++a) {
    for (std::size_t b = 0; b + 1 < ts.size(); ++b) {
      const PhasePoint c{0.5 * (js[a] + js[a + 1]), 0.5 * (ts[b] + ts[b + 1])};
      if (std::none_of(domains.begin(), domains.end(), [&](const Domain& d) { return inside_closed(d, c); })) {
        throw Error(ErrorCode::GapBetweenDomains, "domains leave part of the window uncovered");
      }
    }
  }
  PartitionOfUnity out;
  out.domains_ = std::move(domains);
  out.frontier_width_ = frontier_width;
  out.grid_ = grid;
  return out;
}

}  // namespace cpcell
