#include <cmath>
#include <random>

#include "cpcell/grid.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cpcell;

namespace {

GridSpec unit_lattice(std::int64_t n) { return GridSpec(1.0, 1.0, 1.0, {0.0, 0.0}, {n, n}); }

std::vector<PhasePoint> star_polygon(std::mt19937_64& rng, PhasePoint c, double r_lo, double r_hi, int n) {
  std::uniform_real_distribution<double> radius(r_lo, r_hi);
  std::vector<PhasePoint> pts;
  for (int m = 0; m < n; ++m) {
    const double a = 2.0 * M_PI * m / n;
    const double r = radius(rng);
    pts.push_back({c.j + r * std::cos(a), c.theta + r * std::sin(a)});
  }
  pts.push_back(pts.front());
  return pts;
}

}  // namespace

TEST_CASE("grid spec enforces box volume and extent") {
  CHECK_NOTHROW(GridSpec(0.1, 0.1, 0.01, {0, 0}, {4, 4}));
  CHECK_THROWS_AS(GridSpec(0.1, 0.1, 0.02, {0, 0}, {4, 4}), Error);
  CHECK_THROWS_AS(GridSpec(0.1, 0.1, 0.01, {0, 0}, {0, 4}), Error);
  const auto g = GridSpec::from_hbar(0.01, {0, 0}, {3, 3}, 4.0, 2, true);
  CHECK(g.box_volume() == doctest::Approx(0.01));
  CHECK(g.delta_j() / g.delta_theta() == doctest::Approx(4.0));
}

TEST_CASE("square cells: 10x10 and 3x3 box counts") {
  const auto g = unit_lattice(20);
  const auto c10 = rasterize(Region::rectangle({2, 3}, 10, 10), g);
  CHECK(c10.frontier.size() == 36);
  CHECK(c10.interior.size() == 64);
  CHECK(omega(c10) == doctest::Approx(0.5625));

  const auto c3 = rasterize(Region::rectangle({5, 5}, 3, 3), g);
  CHECK(c3.frontier.size() == 8);
  CHECK(c3.interior.size() == 1);
  CHECK(omega(c3) == doctest::Approx(8.0));
}

TEST_CASE("one-box region has a frontier but no interior") {
  const auto cell = rasterize(Region::rectangle({4, 4}, 1, 1), unit_lattice(10));
  CHECK(cell.interior.empty());
  REQUIRE(cell.frontier.size() == 1);
  CHECK(cell.frontier[0] == BoxIndex{4, 4});
  CHECK_THROWS_WITH_AS(omega(cell), doctest::Contains("OmegaUndefined"), Error);
}

TEST_CASE("rasterize error paths") {
  const auto g = unit_lattice(10);
  CHECK_THROWS_WITH_AS(rasterize(Region::rectangle({8, 8}, 4, 1), g), doctest::Contains("RegionOutsideGrid"), Error);
  CHECK_THROWS_WITH_AS(rasterize(Region::rectangle({2, 2}, 0.5, 0.5), g), doctest::Contains("DegenerateRegion"),
                       Error);
  CHECK_THROWS_AS(Region({{0, 0}, {1, 0}, {1, 1}, {0, 0.5}}), Error);
  CHECK_THROWS_AS(Region({{0, 0}, {0, 1}, {1, 1}, {0, 0}}), Error);  // clockwise
}

TEST_CASE("counting consistency for n x n squares, n = 2..50") {
  const auto g = unit_lattice(60);
  double previous = INFINITY;
  for (int n = 2; n <= 50; ++n) {
    const auto cell = rasterize(Region::rectangle({3, 4}, n, n), g);
    REQUIRE(cell.frontier.size() == static_cast<std::size_t>(4 * n - 4));
    REQUIRE(cell.interior.size() == static_cast<std::size_t>((n - 2) * (n - 2)));
    if (n >= 3) {
      const double w = omega(cell);
      CHECK(w < previous);
      previous = w;
    }
  }
}

TEST_CASE("translation by whole boxes translates the cell") {
  std::mt19937_64 rng(7);
  const GridSpec g(0.1, 0.25, 0.025, {-1.0, 2.0}, {80, 60});
  for (int trial = 0; trial < 20; ++trial) {
    auto pts = star_polygon(rng, {1.5, 7.0}, 0.6, 1.5, 40);
    const Region src(pts);
    const std::int64_t di = trial % 5, dk = 3 - trial % 7;
    for (auto& p : pts) {
      p.j += di * g.delta_j();
      p.theta += dk * g.delta_theta();
    }
    const auto a = rasterize(src, g);
    const auto b = rasterize(Region(pts), g);
    REQUIRE(a.frontier.size() == b.frontier.size());
    REQUIRE(a.interior.size() == b.interior.size());
    CHECK(omega(a) == omega(b));
    for (std::size_t n = 0; n < a.interior.size(); ++n) {
      CHECK(b.interior[n] == BoxIndex{a.interior[n].i + di, a.interior[n].k + dk});
    }
  }
}

TEST_CASE("random polygons agree with brute-force clipping oracle") {
  std::mt19937_64 rng(2024);
  const GridSpec g(0.5, 0.5, 0.25, {0.0, 0.0}, {40, 40});
  for (int trial = 0; trial < 40; ++trial) {
    const auto pts = star_polygon(rng, {10.0, 10.0}, 2.0, 8.0, 5 + trial % 30);
    const auto fast = rasterize(Region(pts), g);
    const auto slow = oracle::classify_boxes(pts, g);
    REQUIRE(fast.frontier == slow.frontier);
    REQUIRE(fast.interior == slow.interior);
  }
}

TEST_CASE("grid-aligned polygons with lattice-line edges agree with the oracle") {
  // An L shape: its reflex corner touches a box diagonally.
  const std::vector<PhasePoint> pts{{2, 2}, {8, 2}, {8, 4}, {4, 4}, {4, 9}, {2, 9}, {2, 2}};
  const auto g = unit_lattice(12);
  const auto fast = rasterize(Region(pts), g);
  const auto slow = oracle::classify_boxes(pts, g);
  CHECK(fast.frontier == slow.frontier);
  CHECK(fast.interior == slow.interior);
  CHECK(fast.is_frontier({3, 3}));
  CHECK_FALSE(fast.is_frontier({4, 4}));
}

TEST_CASE("cell invariants: disjoint, frontier boxes sit on the boundary") {
  std::mt19937_64 rng(99);
  const GridSpec g(0.2, 0.2, 0.04, {0.0, 0.0}, {100, 100});
  for (int trial = 0; trial < 10; ++trial) {
    const auto pts = star_polygon(rng, {10.0, 10.0}, 3.0, 9.0, 60);
    const auto cell = rasterize(Region(pts), g);
    for (const auto& b : cell.frontier) CHECK_FALSE(cell.is_interior(b));
    for (const auto& b : cell.interior) {
      // every interior box is surrounded by cell boxes
      for (int di = -1; di <= 1; ++di)
        for (int dk = -1; dk <= 1; ++dk) {
          const BoxIndex nb{b.i + di, b.k + dk};
          CHECK((cell.is_interior(nb) || cell.is_frontier(nb)));
        }
    }
  }
}
