#include <cmath>
#include <random>

#include "cpcell/shear.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cpcell;

namespace {

GridSpec lattice_01() { return GridSpec(0.1, 0.1, 0.01, {0.0, 0.0}, {14, 14}); }

std::vector<double> time_grid(double t0, double t1, int n) {
  std::vector<double> out{0.0};
  for (int k = 0; k < n; ++k) out.push_back(t0 + (t1 - t0) * k / (n - 1));
  return out;
}

}  // namespace

TEST_CASE("flow map of linear and quadratic models") {
  const auto lin = HamiltonianModel::linear(0.5, 1.5);
  const auto s = flow_map(lin, {0.7, 0.2}, 2.0);
  CHECK(s.j == 0.7);
  CHECK(s.theta == doctest::Approx(0.2 + 3.0));
  const auto quad = HamiltonianModel::quadratic(0.0, 1.0, 0.25);
  const auto q = flow_map(quad, {0.8, 0.1}, 3.0);
  CHECK(q.theta == doctest::Approx(0.1 + (1.0 + 2.0 * 0.25 * 0.8) * 3.0));
  const auto osc = HamiltonianModel::oscillatory(3, 0.4, 0.1);
  const auto o = flow_map(osc, {0.25, 0.0}, 2.0);
  CHECK(o.theta == doctest::Approx(0.4 * std::cos(3 * 0.25 / 0.1) * 2.0));
  for (const auto& m : {lin, quad, osc}) {
    const auto id = flow_map(m, {0.3, -0.4}, 0.0);
    CHECK(id.j == 0.3);
    CHECK(id.theta == -0.4);
  }
}

TEST_CASE("flow map conserves the action bit for bit") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  const HamiltonianModel models[] = {HamiltonianModel::polynomial({0.1, -0.3, 0.2, 0.05}),
                                     HamiltonianModel::oscillatory(7, 0.3, 0.05)};
  for (const auto& m : models) {
    for (int n = 0; n < 1000; ++n) {
      const double j = u(rng);
      CHECK(flow_map(m, {j, u(rng)}, u(rng)).j == j);
    }
  }
}

TEST_CASE("flow map composes exactly on dyadic data") {
  const auto m = HamiltonianModel::polynomial({0.0, 0.5, 0.25, -0.125});
  for (double j : {0.5, 1.25, -0.75}) {
    for (double t1 : {0.5, 2.0, -1.5}) {
      for (double t2 : {0.25, 3.0}) {
        const auto once = flow_map(m, {j, 0.375}, t1 + t2);
        const auto twice = flow_map(m, flow_map(m, {j, 0.375}, t1), t2);
        CHECK(once.j == twice.j);
        CHECK(once.theta == twice.theta);
      }
    }
  }
}

TEST_CASE("flow map composition agrees to rounding on generic data") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const auto m = HamiltonianModel::polynomial({0.3, -0.7, 0.45, 0.11});
  for (int n = 0; n < 1000; ++n) {
    const FlowState s{u(rng), u(rng)};
    const double t1 = u(rng), t2 = u(rng);
    const auto once = flow_map(m, s, t1 + t2);
    const auto twice = flow_map(m, flow_map(m, s, t1), t2);
    CHECK(once.j == twice.j);
    const double scale = std::abs(s.theta) + std::abs(m.velocity(s.j)) * (std::abs(t1) + std::abs(t2));
    CHECK(std::abs(once.theta - twice.theta) <= 8 * std::numeric_limits<double>::epsilon() * scale);
  }
}

TEST_CASE("advected polygon keeps its area for affine shears") {
  const auto grid = lattice_01();
  const auto src = Region::rectangle({0.3, 0.2}, 1.0, 1.0);
  for (const auto& m : {HamiltonianModel::linear(0.0, 1.3), HamiltonianModel::quadratic(0.0, 1.0, 0.25)}) {
    for (double t : {0.5, 7.0, 40.0}) {
      const auto img = advect_boundary(src, m, t, grid);
      CHECK(std::abs(signed_area(img) - src.area()) <= 1e-9 * src.area());
    }
  }
}

TEST_CASE("image boundary is sampled finer than half a box") {
  const auto grid = lattice_01();
  const auto src = Region::rectangle({0.3, 0.2}, 1.0, 1.0);
  const auto m = HamiltonianModel::polynomial({0.0, 0.0, 0.5, 0.3});
  const auto img = advect_boundary(src, m, 6.0, grid);
  for (std::size_t n = 0; n + 1 < img.size(); ++n) {
    CHECK(std::abs(img[n + 1].j - img[n].j) < 0.5 * grid.delta_j());
    CHECK(std::abs(img[n + 1].theta - img[n].theta) < 0.5 * grid.delta_theta());
  }
}

TEST_CASE("quadratic shear image matches the box oracle on the exact parallelogram") {
  const auto grid = lattice_01();
  const auto src = Region::rectangle({0.23, 0.17}, 1.0, 1.0);
  const auto m = HamiltonianModel::quadratic(0.0, 0.3, 0.25);
  for (double t : {0.0, 1.3, 4.7}) {
    const Cell cell = advect_cell(src, m, t, grid);
    std::vector<PhasePoint> para;
    for (const auto& p : src.boundary()) {
      const auto s = flow_map(m, {p.j, p.theta}, t);
      para.push_back({s.j, s.theta});
    }
    const auto expected = oracle::classify_boxes(para, cell.grid);
    CHECK(cell.frontier == expected.frontier);
    CHECK(cell.interior == expected.interior);
  }
}

TEST_CASE("advect at t = 0 equals rasterize") {
  const auto grid = lattice_01();
  const auto src = Region::rectangle({0.23, 0.17}, 0.8, 0.6);
  const Cell a = advect_cell(src, HamiltonianModel::quadratic(0, 1, 0.25), 0.0, grid);
  const Cell b = rasterize(src, grid);
  CHECK(a.frontier.size() == b.frontier.size());
  CHECK(a.interior.size() == b.interior.size());
}

TEST_CASE("linear model translates the cell rigidly") {
  const auto grid = lattice_01();
  const auto src = Region::rectangle({0.2, 0.1}, 1.0, 1.0);
  const auto lin = HamiltonianModel::linear(0.0, 0.25);
  const Cell c0 = advect_cell(src, lin, 0.0, grid);
  for (double t : {0.4, 1.2, 8.0}) {
    const Cell c = advect_cell(src, lin, t, grid);
    CHECK(c.frontier.size() == c0.frontier.size());
    CHECK(c.interior.size() == c0.interior.size());
  }
  const double tol = 4.0 * grid.hbar_eff() / src.area();
  const auto series = omega_growth(HamiltonianModel::linear(0.0, 0.37), src, grid, time_grid(0.5, 20.0, 40));
  for (const auto& w : series.measured_omega) CHECK(std::abs(*w - *series.measured_omega[0]) <= tol);
}

TEST_CASE("closed-form omega growth") {
  const auto grid = lattice_01();
  CHECK(predicted_delta_omega(HamiltonianModel::linear(1, 2), 1.0, 1.0, grid, 3.0) == 0.0);
  CHECK(predicted_delta_omega(HamiltonianModel::quadratic(0, 0, 0.25), 1.0, 1.0, grid, 2.0) ==
        doctest::Approx(0.2));
  CHECK(predicted_delta_omega(HamiltonianModel::oscillatory(20, 0.3, 0.1), 1.0, 1.0, grid, 5.0) ==
        doctest::Approx(3.0));
  try {
    predicted_delta_omega(HamiltonianModel::polynomial({0, 0, 0, 1}), 1.0, 1.0, grid, 1.0);
    FAIL("expected NoClosedForm");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoClosedForm);
  }
}

TEST_CASE("quadratic shear: phase-averaged growth tracks the closed form") {
  const auto grid = GridSpec(0.1, 0.1, 0.01, {-0.05, -0.05}, {12, 12});
  const auto src = Region::rectangle({0.0, 0.0}, 1.0, 1.0);
  const auto m = HamiltonianModel::quadratic(0.0, 0.0, 0.25);
  // delta theta = 2 a2 J t = t / 2, so [5, 50] boxes means t in [1, 10]
  const auto times = time_grid(1.0, 10.0, 10);
  const auto series = omega_growth_phase_averaged(m, src, grid, times, 6);
  for (std::size_t n = 1; n < times.size(); ++n) {
    const double ratio = series.measured_delta_omega[n] / *series.predicted_delta_omega[n];
    CHECK(ratio > 0.9);
    CHECK(ratio < 1.1);
  }
  CHECK(series.predicted_delta_omega[0] == 0.0);
  CHECK(series.measured_delta_omega[0] == 0.0);
}

TEST_CASE("degree three model has no prediction but is measured") {
  const auto grid = lattice_01();
  const auto series = omega_growth(HamiltonianModel::polynomial({0, 0, 0, 0.2}), Region::rectangle({0.2, 0.1}, 1, 1),
                                   grid, time_grid(1.0, 3.0, 3));
  for (const auto& p : series.predicted_delta_omega) CHECK_FALSE(p.has_value());
  CHECK(series.measured_delta_omega.back() > 0.0);
}

TEST_CASE("halving the action width halves the growth") {
  const auto src = Region::rectangle({0.0, 0.0}, 1.0, 1.0);
  const auto m = HamiltonianModel::quadratic(0.0, 0.0, 0.25);
  const std::vector<double> times{0.0, 8.0};
  const auto coarse = omega_growth_phase_averaged(m, src, GridSpec(0.1, 0.1, 0.01, {-0.1, -0.1}, {12, 12}), times, 4);
  const auto fine =
      omega_growth_phase_averaged(m, src, GridSpec(0.05, 0.1, 0.005, {-0.1, -0.1}, {24, 12}), times, 4);
  const double ratio = fine.measured_delta_omega[1] / coarse.measured_delta_omega[1];
  CHECK(ratio == doctest::Approx(0.5).epsilon(0.15));

  // isotropic refinement by sqrt 2 on both axes follows the closed form, 1 / sqrt 2
  const double d = 0.1 / std::sqrt(2.0);
  const auto iso = omega_growth_phase_averaged(m, src, GridSpec(d, d, d * d, {-0.1, -0.1}, {17, 17}), times, 4);
  const double iso_ratio = iso.measured_delta_omega[1] / coarse.measured_delta_omega[1];
  CHECK(iso_ratio == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.15));
  CHECK(*iso.predicted_delta_omega[1] / *coarse.predicted_delta_omega[1] == doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("oscillatory model: growth is unbounded and near the closed form") {
  const auto grid = lattice_01();
  const auto src = Region::rectangle({0.0, 0.0}, 1.0, 1.0);
  const auto m = HamiltonianModel::oscillatory(20, 0.3, 0.1);
  const auto series = omega_growth_phase_averaged(m, src, grid, time_grid(1.0, 12.0, 12), 3);
  for (std::size_t n = 1; n < series.times.size(); ++n) {
    const double ratio = series.measured_delta_omega[n] / *series.predicted_delta_omega[n];
    CHECK(ratio >= 0.5);
    CHECK(ratio <= 2.0);
  }
  CHECK(series.measured_delta_omega.back() > 3.0);
}

TEST_CASE("omega growth validates the time list") {
  const auto grid = lattice_01();
  const auto src = Region::rectangle({0.2, 0.1}, 1, 1);
  const auto m = HamiltonianModel::linear(0, 1);
  const std::vector<double> bad_start{0.5, 1.0};
  const std::vector<double> unsorted{0.0, 2.0, 1.0};
  CHECK_THROWS_AS(omega_growth(m, src, grid, bad_start), Error);
  CHECK_THROWS_AS(omega_growth(m, src, grid, unsorted), Error);
  const std::vector<double> ok{0.0};
  CHECK_THROWS_AS(omega_growth_phase_averaged(m, src, grid, ok, 0), Error);
}

TEST_CASE("cell means follow the classical trajectory") {
  const auto grid = lattice_01();
  const std::vector<WeightedPoint> point{{{0.43, 0.21}, 1.0}};
  CHECK(cell_mean(point, [](PhasePoint p) { return p.j; }, grid) == 0.43);

  const auto c = grid.box_center(3, 5);
  std::vector<WeightedPoint> box;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      box.push_back({{c.j + (a - 1.5) * 0.025, c.theta + (b - 1.5) * 0.025}, 1.0 / 16.0});
  const auto lin = HamiltonianModel::linear(0.0, 0.7);
  const double t = 2.5;
  CHECK(cell_mean(box, [](PhasePoint p) { return p.theta; }, grid, lin, t) ==
        doctest::Approx(c.theta + 0.7 * t).epsilon(1e-12));
  CHECK(cell_mean(box, [](PhasePoint p) { return p.j; }, grid, lin, t) == doctest::Approx(c.j).epsilon(1e-12));

  const std::vector<WeightedPoint> half{{{0.43, 0.21}, 0.5}};
  try {
    cell_mean(half, [](PhasePoint) { return 1.0; }, grid);
    FAIL("expected UnnormalizedDensity");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnnormalizedDensity);
  }
}

TEST_CASE("model strings parse and print") {
  const auto q = HamiltonianModel::parse("quad:0,1,0.25");
  CHECK(q.degree() == 2);
  CHECK(q.velocity(2.0) == doctest::Approx(2.0));
  const auto o = HamiltonianModel::parse("osc:20,0.3,0.1");
  REQUIRE(o.as_oscillatory() != nullptr);
  CHECK(o.as_oscillatory()->mode == 20);
  const auto p = HamiltonianModel::parse("poly:1,2,3,4");
  CHECK(p.degree() == 3);
  CHECK(HamiltonianModel::parse(p.to_string()).velocity(0.7) == p.velocity(0.7));
  CHECK(HamiltonianModel::parse("linear:0,2").velocity(5.0) == 2.0);
  for (const char* bad : {"cubic:1,2", "quad:1,x,2", "osc:0,1,1", "linear:", "quad:1,2"}) {
    CHECK_THROWS_AS(HamiltonianModel::parse(bad), Error);
  }
}
