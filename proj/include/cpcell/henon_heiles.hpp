#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "cpcell/grid.hpp"

namespace cpcell::hh {

struct State {
  double x = 0.0;
  double y = 0.0;
  double px = 0.0;
  double py = 0.0;
};

/// H = (px^2 + py^2 + x^2 + y^2)/2 + coupling (x^2 y - lambda y^3).
/// coupling = 0 gives two decoupled unit-frequency oscillators.
struct Params {
  double lambda = 1.0 / 3.0;
  double coupling = 1.0;
  double step = 1e-3;
  double energy = 1.0 / 12.0;
  double escape_radius = 10.0;
};

double energy(const State& s, const Params& p);

/// One position-Verlet step (drift, kick, drift). A negative h runs backwards.
State verlet_step(const State& s, double h, const Params& p);

struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
};

/// Integrates for time T (negative T runs backwards) and samples every `stride`
/// steps plus the final state. Throws EscapeDetected past the escape radius.
Trajectory integrate(const State& initial, const Params& params, double T, std::size_t stride = 1);

/// Point of the x = 0, px > 0 surface of section.
struct SectionPoint {
  double y = 0.0;
  double py = 0.0;
  double t = 0.0;
};

/// px^2 implied by the energy shell at x = 0.
double shell_px_squared(double y, double py, const Params& p);

/// Phase-space state on the section for (y, py). Throws SeedOffShell when the
/// point lies outside the energetically allowed region.
State section_state(double y, double py, const Params& p);

/// Records n_crossings successive upward crossings of x = 0 for every seed.
/// Each crossing is refined by bisecting the length of the last Verlet substep
/// until |x| < 1e-10.
std::vector<std::vector<SectionPoint>> poincare_section(const Params& params, std::span<const SectionPoint> seeds,
                                                        std::size_t n_crossings);

/// Crossing state in full, for consistency checks.
struct Crossing {
  State state;
  double t = 0.0;
};
std::vector<std::vector<Crossing>> section_crossings(const Params& params, std::span<const SectionPoint> seeds,
                                                     std::size_t n_crossings);

/// Maps each section point once around the return map (next upward crossing).
std::vector<PhasePoint> return_map(std::span<const PhasePoint> points, const Params& params);

enum class OrbitLabel { regular, chaotic };

struct ClassifierOptions {
  double renorm_distance = 1e-8;
  double renorm_interval = 1.0;
  double horizon = 1e3;
  double threshold = 0.01;
  std::size_t threads = 1;
};

struct OrbitClass {
  SectionPoint seed;
  OrbitLabel label = OrbitLabel::regular;
  double ftle = 0.0;  // +inf for escaping orbits
  bool escaped = false;
  std::vector<SectionPoint> section;
};

/// Two-trajectory finite-time Lyapunov estimate. Each orbit is followed until
/// it has n_crossings section points and at least `horizon` time units.
std::vector<OrbitClass> classify_orbits(const Params& params, std::span<const SectionPoint> seeds,
                                        std::size_t n_crossings, const ClassifierOptions& options = {});

struct RegularFraction {
  double fraction = 0.0;
  std::vector<OrbitClass> orbits;
};

/// Seeds a resolution x resolution grid of equal-area cells over the allowed
/// section region, classifies every orbit and returns the regular fraction.
RegularFraction regular_fraction(const Params& params, std::size_t resolution, std::size_t n_crossings,
                                 const ClassifierOptions& options = {});

/// Seeds at the centres of a resolution x resolution grid over the allowed region.
std::vector<SectionPoint> seed_grid(const Params& params, std::size_t resolution);

/// Bounds of the allowed section region: y in [y_lo, y_hi], |py| <= py_max.
struct SectionBounds {
  double y_lo, y_hi, py_max;
};
SectionBounds section_bounds(const Params& params);

struct AmoebaOptions {
  std::size_t point_budget = 1'000'000;
};

struct AmoebaStep {
  std::size_t n_return = 0;
  std::optional<double> omega;  // empty when the cell has no interior box
  std::size_t frontier_boxes = 0;
  std::size_t interior_boxes = 0;
  std::size_t boundary_points = 0;
  PhasePoint centroid;           // centroid of the advected region
  bool centroid_covered = true;  // centroid lies in a box of the cell
  PhasePoint transported_center; // original centre carried by the return map
};

struct AmoebaSeries {
  std::vector<AmoebaStep> steps;
};

/// Thrown when boundary refinement needs more points than the budget: the
/// filaments have fallen below box scale. Carries the series computed so far.
class FoldResolutionExceeded : public Error {
 public:
  FoldResolutionExceeded(AmoebaSeries partial, std::size_t n_return)
      : Error(ErrorCode::FoldResolutionExceeded,
              "boundary point budget exceeded at return " + std::to_string(n_return)),
        partial_(std::move(partial)), n_return_(n_return) {}
  const AmoebaSeries& partial() const { return partial_; }
  std::size_t failed_return() const { return n_return_; }

 private:
  AmoebaSeries partial_;
  std::size_t n_return_;
};

/// Carries the boundary of a section cell (y along the action axis, py along the
/// angle axis of `grid`) through n successive returns, re-rasterizing after each.
AmoebaSeries advect_cell_hh(const Region& source, const Params& params, std::size_t n_returns,
                            const GridSpec& grid, const AmoebaOptions& options = {});

struct CenterEscape {
  bool escaped = false;
  std::optional<std::size_t> first_return;
  AmoebaSeries series;
};

/// True when, at some return 1..n, the centroid of the advected cell lies
/// outside the boxes of the cell.
CenterEscape center_escape_check(const Region& source, const Params& params, std::size_t n_returns,
                                 const GridSpec& grid, const AmoebaOptions& options = {});

}  // namespace cpcell::hh
