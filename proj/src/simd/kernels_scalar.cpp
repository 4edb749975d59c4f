#include <cmath>

#include "cpcell/simd/kernels.hpp"

namespace cpcell::simd::scalar {

void shear_polynomial(std::span<const double> j, std::span<const double> theta_in, std::span<double> theta_out,
                      std::span<const double> velocity_coeffs, double t) {
  const std::size_t deg = velocity_coeffs.size();
  for (std::size_t n = 0; n < j.size(); ++n) {
    double v = 0.0;
    for (std::size_t c = deg; c-- > 0;) v = v * j[n] + velocity_coeffs[c];
    theta_out[n] = theta_in[n] + v * t;
  }
}

void hh_verlet(StateBatch b, double h, double coupling, double lambda, std::size_t steps) {
  const double half = 0.5 * h;
  const double two_c = 2.0 * coupling;
  const double three_lambda = 3.0 * lambda * coupling;
  for (std::size_t n = 0; n < b.size(); ++n) {
    double x = b.x[n], y = b.y[n], px = b.px[n], py = b.py[n];
    for (std::size_t s = 0; s < steps; ++s) {
      x = x + half * px;
      y = y + half * py;
      const double fx = x + two_c * x * y;
      const double fy = y + coupling * x * x - three_lambda * y * y;
      px = px - h * fx;
      py = py - h * fy;
      x = x + half * px;
      y = y + half * py;
    }
    b.x[n] = x;
    b.y[n] = y;
    b.px[n] = px;
    b.py[n] = py;
  }
}

std::complex<double> phasor_trapezoid(std::span<const double> f, double nu0, double dnu, double t) {
  if (f.empty()) return {};
  double re = 0.0, im = 0.0;
  for (std::size_t n = 0; n < f.size(); ++n) {
    const double w = (n == 0 || n + 1 == f.size()) ? 0.5 : 1.0;
    const double phase = (nu0 + static_cast<double>(n) * dnu) * t;
    re += w * f[n] * std::cos(phase);
    im -= w * f[n] * std::sin(phase);
  }
  return {re * dnu, im * dnu};
}

}  // namespace cpcell::simd::scalar
