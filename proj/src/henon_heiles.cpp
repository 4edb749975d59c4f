#include "cpcell/henon_heiles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "cpcell/simd/kernels.hpp"

namespace cpcell::hh {
namespace {

constexpr double kCrossingTol = 1e-10;
constexpr int kBisectionIters = 60;
constexpr double kMaxReturnTime = 1e4;

void check_params(const Params& p) {
  if (!(p.step > 0.0) || !std::isfinite(p.step)) throw Error(ErrorCode::InvalidArgument, "step must be positive");
  if (!(p.lambda >= 0.0) || !(p.coupling >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "cubic coefficient and coupling must be >= 0");
  }
  if (!(p.escape_radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "escape radius must be positive");
}

bool escaped(const State& s, double radius) {
  return !(std::abs(s.x) <= radius && std::abs(s.y) <= radius && std::isfinite(s.px) && std::isfinite(s.py));
}

// Structure-of-arrays lanes advanced in lock step by the SIMD Verlet kernel.
class Lanes {
 public:
  void push(const State& s, std::size_t tag) {
    x_.push_back(s.x);
    y_.push_back(s.y);
    px_.push_back(s.px);
    py_.push_back(s.py);
    x_prev_.push_back(s.x);
    tag_.push_back(tag);
  }

  std::size_t size() const { return x_.size(); }
  std::size_t tag(std::size_t n) const { return tag_[n]; }
  State get(std::size_t n) const { return {x_[n], y_[n], px_[n], py_[n]}; }
  void set(std::size_t n, const State& s) {
    x_[n] = s.x;
    y_[n] = s.y;
    px_[n] = s.px;
    py_[n] = s.py;
  }

  void step(double h, const Params& p) {
    x_prev_ = x_;
    simd::hh_verlet({x_, y_, px_, py_}, h, p.coupling, p.lambda, 1);
  }

  bool crossed_upward(std::size_t n) const { return x_prev_[n] < 0.0 && x_[n] >= 0.0; }

  // Stable compaction; keep[n] != 0 retains lane n.
  void retain(const std::vector<char>& keep) {
    std::size_t out = 0;
    for (std::size_t n = 0; n < size(); ++n) {
      if (!keep[n]) continue;
      x_[out] = x_[n];
      y_[out] = y_[n];
      px_[out] = px_[n];
      py_[out] = py_[n];
      x_prev_[out] = x_prev_[n];
      tag_[out] = tag_[n];
      ++out;
    }
    for (auto* v : {&x_, &y_, &px_, &py_, &x_prev_}) v->resize(out);
    tag_.resize(out);
  }

 private:
  std::vector<double> x_, y_, px_, py_, x_prev_;
  std::vector<std::size_t> tag_;
};

// Refines an upward crossing that happened during the last step of size h.
// The pre-step state is recovered by the exact Verlet inverse.
Crossing refine_crossing(const State& after, double t_after, double h, const Params& p) {
  const State before = verlet_step(after, -h, p);
  double lo = 0.0;
  double hi = h;
  State best = after;
  double best_s = h;
  for (int it = 0; it < kBisectionIters; ++it) {
    const double mid = 0.5 * (lo + hi);
    const State s = verlet_step(before, mid, p);
    best = s;
    best_s = mid;
    if (std::abs(s.x) < kCrossingTol) break;
    if (s.x < 0.0) lo = mid;
    else hi = mid;
  }
  return {best, t_after - h + best_s};
}

double polyline_gap(PhasePoint a, PhasePoint b, const GridSpec& grid) {
  return std::max(std::abs(a.j - b.j) / grid.delta_j(), std::abs(a.theta - b.theta) / grid.delta_theta());
}

}  // namespace

double energy(const State& s, const Params& p) {
  return 0.5 * (s.px * s.px + s.py * s.py + s.x * s.x + s.y * s.y) +
         p.coupling * (s.x * s.x * s.y - p.lambda * s.y * s.y * s.y);
}

State verlet_step(const State& s, double h, const Params& p) {
  const double half = 0.5 * h;
  const double two_c = 2.0 * p.coupling;
  const double three_lambda = 3.0 * p.lambda * p.coupling;
  double x = s.x + half * s.px;
  double y = s.y + half * s.py;
  const double fx = x + two_c * x * y;
  const double fy = y + p.coupling * x * x - three_lambda * y * y;
  const double px = s.px - h * fx;
  const double py = s.py - h * fy;
  x = x + half * px;
  y = y + half * py;
  return {x, y, px, py};
}

Trajectory integrate(const State& initial, const Params& params, double T, std::size_t stride) {
  check_params(params);
  if (params.step > 0.05) throw Error(ErrorCode::InvalidArgument, "step must be <= 0.05");
  if (!std::isfinite(T)) throw Error(ErrorCode::InvalidArgument, "T must be finite");
  stride = std::max<std::size_t>(stride, 1);
  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(initial);
  if (T == 0.0) return traj;

  const double h = std::copysign(params.step, T);
  const double ratio = std::abs(T) / params.step;
  auto full = static_cast<std::size_t>(std::floor(ratio));
  double rest = std::abs(T) - static_cast<double>(full) * params.step;
  if (std::abs(ratio - std::round(ratio)) < 1e-9) {
    full = static_cast<std::size_t>(std::llround(ratio));
    rest = 0.0;
  }
  State s = initial;
  for (std::size_t n = 1; n <= full; ++n) {
    s = verlet_step(s, h, params);
    if (escaped(s, params.escape_radius)) {
      throw Error(ErrorCode::EscapeDetected, "trajectory left the escape radius at t = " + std::to_string(n * h));
    }
    if (n % stride == 0 || (n == full && rest == 0.0)) {
      traj.times.push_back(static_cast<double>(n) * h);
      traj.states.push_back(s);
    }
  }
  if (rest > 0.0) {
    s = verlet_step(s, std::copysign(rest, T), params);
    if (escaped(s, params.escape_radius)) throw Error(ErrorCode::EscapeDetected, "trajectory escaped");
    traj.times.push_back(T);
    traj.states.push_back(s);
  }
  return traj;
}

double shell_px_squared(double y, double py, const Params& p) {
  return 2.0 * p.energy - py * py - y * y + 2.0 * p.coupling * p.lambda * y * y * y;
}

State section_state(double y, double py, const Params& p) {
  const double px2 = shell_px_squared(y, py, p);
  if (!(px2 >= 0.0)) {
    throw Error(ErrorCode::SeedOffShell, "seed (" + std::to_string(y) + ", " + std::to_string(py) +
                                             ") lies outside the energy shell");
  }
  return {0.0, y, std::sqrt(px2), py};
}

std::vector<std::vector<Crossing>> section_crossings(const Params& params, std::span<const SectionPoint> seeds,
                                                     std::size_t n_crossings) {
  check_params(params);
  std::vector<std::vector<Crossing>> out(seeds.size());
  Lanes lanes;
  for (std::size_t n = 0; n < seeds.size(); ++n) lanes.push(section_state(seeds[n].y, seeds[n].py, params), n);
  if (n_crossings == 0) return out;

  const double h = params.step;
  std::vector<char> keep;
  for (std::uint64_t step = 1; lanes.size() > 0; ++step) {
    lanes.step(h, params);
    const double t = static_cast<double>(step) * h;
    bool finished_any = false;
    keep.assign(lanes.size(), 1);
    for (std::size_t n = 0; n < lanes.size(); ++n) {
      const State s = lanes.get(n);
      if (escaped(s, params.escape_radius)) {
        throw Error(ErrorCode::EscapeDetected, "orbit of seed " + std::to_string(lanes.tag(n)) + " escaped");
      }
      if (lanes.crossed_upward(n)) {
        auto& list = out[lanes.tag(n)];
        list.push_back(refine_crossing(s, t, h, params));
        if (list.size() == n_crossings) {
          keep[n] = 0;
          finished_any = true;
        }
      }
    }
    if (finished_any) lanes.retain(keep);
  }
  return out;
}

std::vector<std::vector<SectionPoint>> poincare_section(const Params& params, std::span<const SectionPoint> seeds,
                                                        std::size_t n_crossings) {
  const auto crossings = section_crossings(params, seeds, n_crossings);
  std::vector<std::vector<SectionPoint>> out(crossings.size());
  for (std::size_t n = 0; n < crossings.size(); ++n) {
    for (const auto& c : crossings[n]) out[n].push_back({c.state.y, c.state.py, c.t});
  }
  return out;
}

std::vector<PhasePoint> return_map(std::span<const PhasePoint> points, const Params& params) {
  check_params(params);
  std::vector<PhasePoint> out(points.size());
  Lanes lanes;
  for (std::size_t n = 0; n < points.size(); ++n) lanes.push(section_state(points[n].j, points[n].theta, params), n);
  const double h = params.step;
  std::vector<char> keep;
  for (std::uint64_t step = 1; lanes.size() > 0; ++step) {
    lanes.step(h, params);
    const double t = static_cast<double>(step) * h;
    if (t > kMaxReturnTime) throw Error(ErrorCode::EscapeDetected, "orbit did not return to the section");
    bool finished_any = false;
    keep.assign(lanes.size(), 1);
    for (std::size_t n = 0; n < lanes.size(); ++n) {
      const State s = lanes.get(n);
      if (escaped(s, params.escape_radius)) {
        throw Error(ErrorCode::EscapeDetected, "boundary sample escaped during a return");
      }
      if (lanes.crossed_upward(n)) {
        const Crossing c = refine_crossing(s, t, h, params);
        out[lanes.tag(n)] = {c.state.y, c.state.py};
        keep[n] = 0;
        finished_any = true;
      }
    }
    if (finished_any) lanes.retain(keep);
  }
  return out;
}

namespace {

std::vector<OrbitClass> classify_chunk(const Params& params, std::span<const SectionPoint> seeds,
                                       std::size_t n_crossings, const ClassifierOptions& opt) {
  std::vector<OrbitClass> out(seeds.size());
  std::vector<double> log_sum(seeds.size(), 0.0);
  Lanes lanes;
  // lane 2m is the orbit of seed m, lane 2m+1 its shadow
  for (std::size_t n = 0; n < seeds.size(); ++n) {
    out[n].seed = seeds[n];
    const State s = section_state(seeds[n].y, seeds[n].py, params);
    lanes.push(s, n);
    lanes.push({s.x, s.y + opt.renorm_distance, s.px, s.py}, n);
  }
  const double h = params.step;
  const auto renorm_every =
      std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(opt.renorm_interval / h)));
  std::vector<char> keep;
  for (std::uint64_t step = 1; lanes.size() > 0; ++step) {
    lanes.step(h, params);
    const double t = static_cast<double>(step) * h;
    const bool renorm = step % renorm_every == 0;
    bool removed_any = false;
    keep.assign(lanes.size(), 1);
    for (std::size_t n = 0; n < lanes.size(); n += 2) {
      const std::size_t id = lanes.tag(n);
      const State a = lanes.get(n);
      const State b = lanes.get(n + 1);
      if (escaped(a, params.escape_radius) || escaped(b, params.escape_radius)) {
        out[id].escaped = true;
        out[id].ftle = std::numeric_limits<double>::infinity();
        keep[n] = keep[n + 1] = 0;
        removed_any = true;
        continue;
      }
      if (lanes.crossed_upward(n)) {
        const Crossing c = refine_crossing(a, t, h, params);
        out[id].section.push_back({c.state.y, c.state.py, c.t});
      }
      if (renorm) {
        const double dx = b.x - a.x, dy = b.y - a.y, dpx = b.px - a.px, dpy = b.py - a.py;
        const double d = std::sqrt(dx * dx + dy * dy + dpx * dpx + dpy * dpy);
        if (d > 0.0) {
          log_sum[id] += std::log(d / opt.renorm_distance);
          const double f = opt.renorm_distance / d;
          lanes.set(n + 1, {a.x + dx * f, a.y + dy * f, a.px + dpx * f, a.py + dpy * f});
        }
        if (out[id].section.size() >= n_crossings && t >= opt.horizon) {
          out[id].ftle = log_sum[id] / t;
          keep[n] = keep[n + 1] = 0;
          removed_any = true;
        }
      }
    }
    if (removed_any) lanes.retain(keep);
  }
  for (auto& o : out) {
    o.label = (o.escaped || o.ftle > opt.threshold) ? OrbitLabel::chaotic : OrbitLabel::regular;
    if (o.section.size() > n_crossings) o.section.resize(n_crossings);
  }
  return out;
}

}  // namespace

std::vector<OrbitClass> classify_orbits(const Params& params, std::span<const SectionPoint> seeds,
                                        std::size_t n_crossings, const ClassifierOptions& options) {
  check_params(params);
  if (!(options.renorm_distance > 0.0) || !(options.renorm_interval > 0.0) || !(options.horizon >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "invalid classifier options");
  }
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(options.threads, seeds.size()));
  if (workers == 1) return classify_chunk(params, seeds, n_crossings, options);

  // Lanes are independent, so chunking does not change any result.
  std::vector<std::vector<OrbitClass>> parts(workers);
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  const std::size_t chunk = (seeds.size() + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = std::min(seeds.size(), w * chunk);
    const std::size_t hi = std::min(seeds.size(), lo + chunk);
    pool.emplace_back([&, w, lo, hi] {
      try {
        parts[w] = classify_chunk(params, seeds.subspan(lo, hi - lo), n_crossings, options);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<OrbitClass> out;
  for (auto& p : parts) std::move(p.begin(), p.end(), std::back_inserter(out));
  return out;
}

SectionBounds section_bounds(const Params& p) {
  if (!(p.energy > 0.0)) throw Error(ErrorCode::InvalidArgument, "energy must be positive");
  const double cubic = p.coupling * p.lambda;
  auto g = [&](double y) { return 2.0 * p.energy - y * y + 2.0 * cubic * y * y * y; };
  auto bisect = [&](double a, double b) {  // g(a) > 0 >= g(b) or reverse
    const bool a_pos = g(a) > 0.0;
    for (int it = 0; it < 200; ++it) {
      const double m = 0.5 * (a + b);
      if ((g(m) > 0.0) == a_pos) a = m;
      else b = m;
    }
    return 0.5 * (a + b);
  };
  SectionBounds out{};
  out.py_max = std::sqrt(2.0 * p.energy);
  if (cubic == 0.0) {
    out.y_lo = -out.py_max;
    out.y_hi = out.py_max;
    return out;
  }
  const double y_turn = 1.0 / (3.0 * cubic);
  if (g(y_turn) > 1e-15) throw Error(ErrorCode::InvalidArgument, "energy above the escape energy");
  double far = -1.0;
  while (g(far) > 0.0) far *= 2.0;
  out.y_lo = bisect(0.0, far);
  out.y_hi = g(y_turn) >= 0.0 ? y_turn : bisect(0.0, y_turn);
  return out;
}

std::vector<SectionPoint> seed_grid(const Params& params, std::size_t resolution) {
  const SectionBounds b = section_bounds(params);
  std::vector<SectionPoint> seeds;
  const double dy = (b.y_hi - b.y_lo) / static_cast<double>(resolution);
  const double dpy = 2.0 * b.py_max / static_cast<double>(resolution);
  for (std::size_t i = 0; i < resolution; ++i) {
    for (std::size_t k = 0; k < resolution; ++k) {
      const double y = b.y_lo + (static_cast<double>(i) + 0.5) * dy;
      const double py = -b.py_max + (static_cast<double>(k) + 0.5) * dpy;
      if (shell_px_squared(y, py, params) > 0.0) seeds.push_back({y, py, 0.0});
    }
  }
  return seeds;
}

RegularFraction regular_fraction(const Params& params, std::size_t resolution, std::size_t n_crossings,
                                 const ClassifierOptions& options) {
  if (resolution < 8) throw Error(ErrorCode::InvalidArgument, "seed grid resolution must be >= 8");
  const auto seeds = seed_grid(params, resolution);
  RegularFraction out;
  out.orbits = classify_orbits(params, seeds, n_crossings, options);
  const auto regular = std::count_if(out.orbits.begin(), out.orbits.end(),
                                     [](const OrbitClass& o) { return o.label == OrbitLabel::regular; });
  out.fraction = seeds.empty() ? 0.0 : static_cast<double>(regular) / static_cast<double>(seeds.size());
  return out;
}

AmoebaSeries advect_cell_hh(const Region& source, const Params& params, std::size_t n_returns,
                            const GridSpec& grid, const AmoebaOptions& options) {
  check_params(params);
  for (const auto& p : source.boundary()) {
    if (shell_px_squared(p.j, p.theta, params) <= 0.0) {
      throw Error(ErrorCode::SeedOffShell, "cell extends outside the allowed section region");
    }
  }
  // Open ring of boundary points, refined so neighbours are closer than half a box.
  std::vector<PhasePoint> ring;
  const auto& b = source.boundary();
  for (std::size_t n = 0; n + 1 < b.size(); ++n) {
    const auto pieces = static_cast<std::size_t>(std::floor(polyline_gap(b[n], b[n + 1], grid) / 0.5)) + 1;
    for (std::size_t s = 0; s < pieces; ++s) {
      const double f = static_cast<double>(s) / static_cast<double>(pieces);
      ring.push_back({b[n].j + f * (b[n + 1].j - b[n].j), b[n].theta + f * (b[n + 1].theta - b[n].theta)});
    }
  }
  PhasePoint center = source.centroid();

  AmoebaSeries series;
  auto record = [&](std::size_t n_return) {
    std::vector<PhasePoint> closed(ring);
    closed.push_back(ring.front());
    PhasePoint lo = closed.front(), hi = closed.front();
    for (const auto& p : closed) {
      lo = {std::min(lo.j, p.j), std::min(lo.theta, p.theta)};
      hi = {std::max(hi.j, p.j), std::max(hi.theta, p.theta)};
    }
    const Cell cell = rasterize_polyline(closed, grid.expanded_to(lo, hi));
    AmoebaStep st;
    st.n_return = n_return;
    st.frontier_boxes = cell.frontier.size();
    st.interior_boxes = cell.interior.size();
    if (!cell.interior.empty()) st.omega = omega(cell);
    st.boundary_points = ring.size();
    st.centroid = polygon_centroid(closed);
    st.centroid_covered = cell.covers(st.centroid);
    st.transported_center = center;
    series.steps.push_back(st);
  };
  record(0);

  for (std::size_t n = 1; n <= n_returns; ++n) {
    std::vector<PhasePoint> batch(ring);
    batch.push_back(center);
    auto mapped = return_map(batch, params);
    center = mapped.back();
    mapped.pop_back();
    std::vector<PhasePoint> prev = std::move(ring);
    ring = std::move(mapped);

    for (;;) {
      std::vector<std::size_t> gaps;
      for (std::size_t m = 0; m < ring.size(); ++m) {
        if (polyline_gap(ring[m], ring[(m + 1) % ring.size()], grid) >= 0.5) gaps.push_back(m);
      }
      if (gaps.empty()) break;
      if (ring.size() + gaps.size() > options.point_budget) throw FoldResolutionExceeded(series, n);
      std::vector<PhasePoint> mids;
      mids.reserve(gaps.size());
      for (auto m : gaps) {
        const PhasePoint a = prev[m];
        const PhasePoint c = prev[(m + 1) % prev.size()];
        mids.push_back({0.5 * (a.j + c.j), 0.5 * (a.theta + c.theta)});
      }
      const auto mapped_mids = return_map(mids, params);
      std::vector<PhasePoint> new_prev, new_ring;
      new_prev.reserve(ring.size() + gaps.size());
      new_ring.reserve(ring.size() + gaps.size());
      std::size_t g = 0;
      for (std::size_t m = 0; m < ring.size(); ++m) {
        new_prev.push_back(prev[m]);
        new_ring.push_back(ring[m]);
        if (g < gaps.size() && gaps[g] == m) {
          new_prev.push_back(mids[g]);
          new_ring.push_back(mapped_mids[g]);
          ++g;
        }
      }
      prev = std::move(new_prev);
      ring = std::move(new_ring);
    }
    record(n);
  }
  return series;
}

CenterEscape center_escape_check(const Region& source, const Params& params, std::size_t n_returns,
                                 const GridSpec& grid, const AmoebaOptions& options) {
  CenterEscape out;
  try {
    out.series = advect_cell_hh(source, params, n_returns, grid, options);
  } catch (const FoldResolutionExceeded& e) {
    out.series = e.partial();
  }
  for (const auto& st : out.series.steps) {
    if (st.n_return > 0 && !st.centroid_covered) {
      out.escaped = true;
      out.first_return = st.n_return;
      break;
    }
  }
  return out;
}

}  // namespace cpcell::hh
