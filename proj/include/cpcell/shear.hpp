#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cpcell/grid.hpp"

namespace cpcell {

/// H(J) = sum_n a_n J^n.
struct PolynomialHamiltonian {
  std::vector<double> coeffs;  // a_0 .. a_d
};

/// Single real Fourier mode of the angular velocity: v(J) = B_m cos(m J / delta_J).
struct OscillatoryHamiltonian {
  int mode = 1;
  double amplitude = 0.0;
  double delta_j = 1.0;
};

/// One degree of freedom Hamiltonian in action-angle form. The angle advances
/// at v(J) = dH/dJ while the action is conserved.
class HamiltonianModel {
 public:
  static HamiltonianModel polynomial(std::vector<double> coeffs);
  static HamiltonianModel linear(double a0, double a1) { return polynomial({a0, a1}); }
  static HamiltonianModel quadratic(double a0, double a1, double a2) { return polynomial({a0, a1, a2}); }
  static HamiltonianModel oscillatory(int mode, double amplitude, double delta_j);

  /// Parses `linear:a0,a1`, `quad:a0,a1,a2`, `poly:a0,...` or `osc:m,Bm,deltaJ`.
  static HamiltonianModel parse(const std::string& spec);
  std::string to_string() const;

  bool is_polynomial() const { return std::holds_alternative<PolynomialHamiltonian>(model_); }
  const PolynomialHamiltonian* as_polynomial() const { return std::get_if<PolynomialHamiltonian>(&model_); }
  const OscillatoryHamiltonian* as_oscillatory() const { return std::get_if<OscillatoryHamiltonian>(&model_); }

  /// Index of the highest nonzero coefficient (0 for constants).
  int degree() const;
  double velocity(double j) const;
  /// Horner coefficients of v(J) for polynomial models.
  const std::vector<double>& velocity_coeffs() const { return velocity_coeffs_; }
  /// Upper bound of |v'(J)| on [j_lo, j_hi].
  double velocity_lipschitz(double j_lo, double j_hi) const;

 private:
  std::variant<PolynomialHamiltonian, OscillatoryHamiltonian> model_;
  std::vector<double> velocity_coeffs_;
};

struct FlowState {
  double j = 0.0;
  double theta = 0.0;
};

/// Exact shear flow (j, theta) -> (j, theta + v(j) t).
FlowState flow_map(const HamiltonianModel& model, FlowState state, double t);

/// Batch form of flow_map; `theta_out` may alias `theta`.
void flow_map_batch(const HamiltonianModel& model, std::span<const double> j, std::span<const double> theta,
                    std::span<double> theta_out, double t);

/// Image of the region boundary at time t, resampled so that neighbouring image
/// points are less than half a box apart on both axes.
std::vector<PhasePoint> advect_boundary(const Region& source, const HamiltonianModel& model, double t,
                                        const GridSpec& grid);

/// Rasterized image of the region at time t. The lattice window is grown along
/// the angle axis to hold the image; the returned cell carries that grid.
Cell advect_cell(const Region& source, const HamiltonianModel& model, double t, const GridSpec& grid);

/// Closed-form growth of Omega for a cell of height J and base Theta. Zero for
/// linear models, 2 (v / delta_theta)(hbar / (J Theta)) t with v = 2 a_2 J for
/// quadratic ones and 2 B_m t / Theta for the oscillatory mode. Throws
/// NoClosedForm for polynomial degree >= 3.
double predicted_delta_omega(const HamiltonianModel& model, double cell_height, double cell_base,
                             const GridSpec& grid, double t);

struct OmegaSeries {
  std::vector<double> times;
  /// |Sigma| / |C|; empty when the advected cell has no interior box.
  std::vector<std::optional<double>> measured_omega;
  /// (vol Sigma(t) - vol Sigma(0)) / vol C^T with the conserved continuum volume.
  std::vector<double> measured_delta_omega;
  std::vector<std::optional<double>> predicted_delta_omega;
  std::vector<std::size_t> frontier_boxes;
  std::vector<std::size_t> interior_boxes;
};

/// Advects `source` to every time in `times` (strictly increasing, starting at 0).
/// The closed-form prediction assumes `source` is an axis-aligned rectangle.
OmegaSeries omega_growth(const HamiltonianModel& model, const Region& source, const GridSpec& grid,
                         std::span<const double> times);

/// omega_growth averaged over phases x phases sub-box placements of the lattice
/// origin, offsets ((a + 1/2) / phases, (b + 1/2) / phases) of a box. Box counts
/// of a single placement carry an O(perimeter / box) alignment term that the
/// average removes. Frontier and interior counts are reported as rounded means.
OmegaSeries omega_growth_phase_averaged(const HamiltonianModel& model, const Region& source, const GridSpec& grid,
                                        std::span<const double> times, int phases);

struct WeightedPoint {
  PhasePoint point;
  double weight = 0.0;
};

/// Mean of an observable over a point-test distribution supported within one
/// box neighbourhood. Throws UnnormalizedDensity if the weights do not sum to 1.
double cell_mean(std::span<const WeightedPoint> density, const std::function<double(PhasePoint)>& observable,
                 const GridSpec& grid);

/// Mean of the observable after transporting the distribution for time t.
double cell_mean(std::span<const WeightedPoint> density, const std::function<double(PhasePoint)>& observable,
                 const GridSpec& grid, const HamiltonianModel& model, double t);

}  // namespace cpcell
