#include "cpcell/level_set.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <unordered_map>

#include "cpcell/error.hpp"

namespace cpcell {
namespace {

struct Crossing {
  PhasePoint point;
  std::array<std::int64_t, 2> next{-1, -1};
  bool visited = false;
};

}  // namespace

std::vector<Polyline> extract_level_set(const std::function<double(PhasePoint)>& h, double value,
                                        const GridSpec& window) {
  if (!std::isfinite(value)) throw Error(ErrorCode::InvalidArgument, "level value must be finite");
  const std::int64_t nx = window.extent()[0], ny = window.extent()[1];
  const PhasePoint o = window.origin();
  const double dj = window.delta_j(), dt = window.delta_theta();
  auto node = [&](std::int64_t i, std::int64_t k) {
    return PhasePoint{o.j + static_cast<double>(i) * dj, o.theta + static_cast<double>(k) * dt};
  };

  std::vector<double> v(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (std::int64_t k = 0; k <= ny; ++k) {
    for (std::int64_t i = 0; i <= nx; ++i) {
      const double x = h(node(i, k));
      if (!std::isfinite(x)) throw Error(ErrorCode::InvalidArgument, "h is not finite on the window");
      v[static_cast<std::size_t>(k * (nx + 1) + i)] = x;
    }
  }
  auto at = [&](std::int64_t i, std::int64_t k) { return v[static_cast<std::size_t>(k * (nx + 1) + i)]; };

  // Edge ids: along the action axis from node (i, k) are even, along the angle axis odd.
  auto along_j = [&](std::int64_t i, std::int64_t k) { return 2 * (k * (nx + 1) + i); };
  auto along_t = [&](std::int64_t i, std::int64_t k) { return 2 * (k * (nx + 1) + i) + 1; };

  std::unordered_map<std::int64_t, Crossing> crossings;
  auto crossing = [&](std::int64_t id) -> Crossing& {
    auto it = crossings.find(id);
    if (it != crossings.end()) return it->second;
    const std::int64_t base = id / 2, i = base % (nx + 1), k = base / (nx + 1);
    const bool j_edge = id % 2 == 0;
    const std::int64_t i2 = j_edge ? i + 1 : i, k2 = j_edge ? k : k + 1;
    const double a = at(i, k), b = at(i2, k2);
    const double s = (value - a) / (b - a);
    const PhasePoint p = node(i, k), q = node(i2, k2);
    return crossings[id] = Crossing{{p.j + s * (q.j - p.j), p.theta + s * (q.theta - p.theta)}};
  };
  auto link = [&](std::int64_t a, std::int64_t b) {
    for (auto [from, to] : {std::pair{a, b}, std::pair{b, a}}) {
      auto& c = crossing(from);
      (c.next[0] < 0 ? c.next[0] : c.next[1]) = to;
    }
  };

  for (std::int64_t k = 0; k < ny; ++k) {
    for (std::int64_t i = 0; i < nx; ++i) {
      const bool c0 = at(i, k) >= value, c1 = at(i + 1, k) >= value;
      const bool c2 = at(i + 1, k + 1) >= value, c3 = at(i, k + 1) >= value;
      const std::array<std::int64_t, 4> e{along_j(i, k), along_t(i + 1, k), along_j(i, k + 1), along_t(i, k)};
      const std::array<bool, 4> cut{c0 != c1, c1 != c2, c3 != c2, c0 != c3};
      const int count = cut[0] + cut[1] + cut[2] + cut[3];
      if (count == 2) {
        std::array<std::int64_t, 2> ends{};
        int n = 0;
        for (int m = 0; m < 4; ++m) {
          if (cut[m]) ends[n++] = e[m];
        }
        link(ends[0], ends[1]);
      } else if (count == 4) {
        const PhasePoint centre{o.j + (static_cast<double>(i) + 0.5) * dj, o.theta + (static_cast<double>(k) + 0.5) * dt};
        if ((h(centre) >= value) == c0) {
          link(e[0], e[1]);
          link(e[2], e[3]);
        } else {
          link(e[3], e[0]);
          link(e[1], e[2]);
        }
      }
    }
  }

  std::vector<std::int64_t> ids;
  ids.reserve(crossings.size());
  for (const auto& [id, c] : crossings) ids.push_back(id);
  std::sort(ids.begin(), ids.end());

  std::vector<Polyline> out;
  auto walk = [&](std::int64_t start) {
    Polyline line;
    std::int64_t prev = -1, cur = start;
    while (cur >= 0 && !crossings[cur].visited) {
      Crossing& c = crossings[cur];
      c.visited = true;
      line.points.push_back(c.point);
      const std::int64_t nxt = c.next[0] != prev ? c.next[0] : c.next[1];
      prev = cur;
      cur = nxt;
    }
    if (cur == start && line.points.size() > 2) {
      line.closed = true;
      line.points.push_back(line.points.front());
    }
    out.push_back(std::move(line));
  };
  for (std::int64_t id : ids) {
    const Crossing& c = crossings[id];
    if (!c.visited && c.next[1] < 0) walk(id);
  }
  for (std::int64_t id : ids) {
    if (!crossings[id].visited) walk(id);
  }
  return out;
}

}  // namespace cpcell
