#pragma once

// Data-parallel inner loops. Each kernel has a scalar reference and an AVX2
// variant; the public entry points dispatch at runtime on the active level.
// The polynomial shear and Verlet kernels round identically in both variants
// (no FMA contraction), so their outputs are bit-identical.

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace cpcell::simd {

enum class Level { scalar, avx2 };

std::string_view to_string(Level level);

/// Best level supported by both the build and the running CPU.
Level detected_level();
/// Level used by the dispatching entry points. Defaults to detected_level(),
/// or to scalar when CPCELL_SIMD=scalar is set in the environment.
Level active_level();
/// Select a level; requests above detected_level() are clamped.
void set_active_level(Level level);

/// Structure-of-arrays view of a batch of Henon-Heiles states.
struct StateBatch {
  std::span<double> x, y, px, py;
  std::size_t size() const { return x.size(); }
};

/// theta_out[n] = theta_in[n] + t * v(j[n]) with v given by Horner coefficients
/// (velocity_coeffs[0] is the constant term).
void shear_polynomial(std::span<const double> j, std::span<const double> theta_in, std::span<double> theta_out,
                      std::span<const double> velocity_coeffs, double t);

/// `steps` position-Verlet steps of size h for the potential
/// (x^2 + y^2)/2 + coupling (x^2 y - lambda y^3), applied to every lane.
void hh_verlet(StateBatch batch, double h, double coupling, double lambda, std::size_t steps);

/// Trapezoid sum  sum_n w_n f[n] exp(-i (nu0 + n dnu) t)  on a uniform grid.
std::complex<double> phasor_trapezoid(std::span<const double> f, double nu0, double dnu, double t);

namespace scalar {
void shear_polynomial(std::span<const double> j, std::span<const double> theta_in, std::span<double> theta_out,
                      std::span<const double> velocity_coeffs, double t);
void hh_verlet(StateBatch batch, double h, double coupling, double lambda, std::size_t steps);
std::complex<double> phasor_trapezoid(std::span<const double> f, double nu0, double dnu, double t);
}  // namespace scalar

namespace avx2 {
bool compiled();
void shear_polynomial(std::span<const double> j, std::span<const double> theta_in, std::span<double> theta_out,
                      std::span<const double> velocity_coeffs, double t);
void hh_verlet(StateBatch batch, double h, double coupling, double lambda, std::size_t steps);
std::complex<double> phasor_trapezoid(std::span<const double> f, double nu0, double dnu, double t);
}  // namespace avx2

}  // namespace cpcell::simd
