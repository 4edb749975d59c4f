#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "cpcell/error.hpp"

namespace cpcell::decoherence {

/// f(nu) = W (gamma / pi) / (nu^2 + gamma^2); its transform is W e^{-gamma |t|}.
struct Lorentzian {
  double weight = 1.0;
  double gamma = 1.0;
};

/// f(nu) = W exp(-nu^2 / (2 sigma^2)) / (sigma sqrt(2 pi)); transform W e^{-sigma^2 t^2 / 2}.
struct Gaussian {
  double weight = 1.0;
  double sigma = 1.0;
};

/// Sampled regular part on a strictly increasing nu grid, linear between samples
/// and zero outside.
struct Tabulated {
  std::vector<double> nu;
  std::vector<double> f;
};

using Regular = std::variant<Lorentzian, Gaussian, Tabulated>;

/// A delta(nu) + f(nu): the singular weight plus an L1 regular part.
struct SpectralKernel {
  double singular_weight = 0.0;
  Regular regular = Lorentzian{0.0, 1.0};

  /// Throws InvalidArgument for non-finite values, non-positive widths or a
  /// malformed table.
  void validate() const;
};

/// Integral of f over the real line.
double regular_weight(const SpectralKernel& kernel);
/// Decay rate used to scale time: gamma, sigma, or the half width at half
/// maximum of |f| for tables.
double effective_rate(const SpectralKernel& kernel);

/// (rho(t)|O) = A + integral f(nu) e^{-i nu t} dnu, with hbar absorbed into t.
/// Analytic models use adaptive Fourier quadrature; tables use the trapezoid rule
/// with panels no wider than pi / (4 |t|), halved until two successive sums
/// agree to 1e-8. Throws QuadratureNotConverged when the budget runs out.
std::complex<double> expectation(const SpectralKernel& kernel, double t);

/// Plain trapezoid sum of a table resampled onto `panels` equal panels.
std::complex<double> tabulated_trapezoid(const Tabulated& table, double t, std::size_t panels);

/// Closed-form transform for analytic models; tables have none.
std::complex<double> closed_form_expectation(const SpectralKernel& kernel, double t);

/// Weak limit of (rho(t)|O) as t goes to infinity, which is A. The value is
/// confirmed by requiring |expectation - A| to decrease over t = 10, 20, 40 in
/// units of 1 / effective_rate. Tables whose end samples are not negligible
/// are treated as truncated and not integrable. Both failures throw NotDecaying.
double weak_limit(const SpectralKernel& kernel);

/// Residuals |expectation(t) - A| at the three confirmation times.
std::vector<double> weak_limit_residuals(const SpectralKernel& kernel);

/// Decohered coefficients: the weak limit of each independent kernel.
std::vector<double> decohered_limit(std::span<const SpectralKernel> kernels);

/// Smallest t with |expectation(t) - A| < epsilon |W|, located on a log grid
/// and refined by bisection to 1e-3 relative. Throws NotDecaying if never reached.
double decoherence_time(const SpectralKernel& kernel, double epsilon);

/// O(omega) delta(omega - omega') + O(omega, omega') on a uniform omega grid.
/// `offdiag` is row-major M x M with a zero diagonal.
struct VanHoveMatrix {
  std::vector<double> omega;
  std::vector<double> diagonal;
  std::vector<std::complex<double>> offdiag;

  std::size_t size() const { return omega.size(); }
  std::complex<double> regular(std::size_t i, std::size_t j) const { return offdiag[i * omega.size() + j]; }
  double spacing() const;
  /// Dense matrix with the delta written as a diagonal of density 1 / d_omega.
  std::vector<std::complex<double>> recombine() const;
};

/// Splits a dense self-adjoint M x M matrix into its singular diagonal band and
/// regular remainder. Throws NotSelfAdjoint beyond 1e-10.
VanHoveMatrix van_hove_split(std::span<const double> omega, std::span<const std::complex<double>> matrix);

/// Keeps the first n coefficients and zeroes the rest. Throws BasisMismatch when
/// n exceeds the state dimension.
std::vector<std::complex<double>> project(std::span<const std::complex<double>> state, std::size_t n);

}  // namespace cpcell::decoherence
