// Compiled with -mavx2 (no -mfma). Only reached through dispatch after a CPU check.

#include <algorithm>
#include <cmath>

#include "cpcell/simd/kernels.hpp"

#if defined(__AVX2__)
#include <immintrin.h>
#endif

namespace cpcell::simd::avx2 {

#if defined(__AVX2__)

bool compiled() { return true; }

void shear_polynomial(std::span<const double> j, std::span<const double> theta_in, std::span<double> theta_out,
                      std::span<const double> velocity_coeffs, double t) {
  const std::size_t n = j.size();
  const std::size_t deg = velocity_coeffs.size();
  const __m256d vt = _mm256_set1_pd(t);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vj = _mm256_loadu_pd(j.data() + i);
    __m256d v = _mm256_setzero_pd();
    for (std::size_t c = deg; c-- > 0;) {
      v = _mm256_add_pd(_mm256_mul_pd(v, vj), _mm256_set1_pd(velocity_coeffs[c]));
    }
    const __m256d th = _mm256_add_pd(_mm256_loadu_pd(theta_in.data() + i), _mm256_mul_pd(v, vt));
    _mm256_storeu_pd(theta_out.data() + i, th);
  }
  if (i < n) {
    scalar::shear_polynomial(j.subspan(i), theta_in.subspan(i), theta_out.subspan(i), velocity_coeffs, t);
  }
}

void hh_verlet(StateBatch b, double h, double coupling, double lambda, std::size_t steps) {
  const std::size_t n = b.size();
  const __m256d vh = _mm256_set1_pd(h);
  const __m256d vhalf = _mm256_set1_pd(0.5 * h);
  const __m256d vtwo = _mm256_set1_pd(2.0 * coupling);
  const __m256d vc = _mm256_set1_pd(coupling);
  const __m256d v3l = _mm256_set1_pd(3.0 * lambda * coupling);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d x = _mm256_loadu_pd(b.x.data() + i);
    __m256d y = _mm256_loadu_pd(b.y.data() + i);
    __m256d px = _mm256_loadu_pd(b.px.data() + i);
    __m256d py = _mm256_loadu_pd(b.py.data() + i);
    for (std::size_t s = 0; s < steps; ++s) {
      x = _mm256_add_pd(x, _mm256_mul_pd(vhalf, px));
      y = _mm256_add_pd(y, _mm256_mul_pd(vhalf, py));
      const __m256d fx = _mm256_add_pd(x, _mm256_mul_pd(_mm256_mul_pd(vtwo, x), y));
      const __m256d fy =
          _mm256_sub_pd(_mm256_add_pd(y, _mm256_mul_pd(_mm256_mul_pd(vc, x), x)), _mm256_mul_pd(_mm256_mul_pd(v3l, y), y));
      px = _mm256_sub_pd(px, _mm256_mul_pd(vh, fx));
      py = _mm256_sub_pd(py, _mm256_mul_pd(vh, fy));
      x = _mm256_add_pd(x, _mm256_mul_pd(vhalf, px));
      y = _mm256_add_pd(y, _mm256_mul_pd(vhalf, py));
    }
    _mm256_storeu_pd(b.x.data() + i, x);
    _mm256_storeu_pd(b.y.data() + i, y);
    _mm256_storeu_pd(b.px.data() + i, px);
    _mm256_storeu_pd(b.py.data() + i, py);
  }
  if (i < n) {
    scalar::hh_verlet({b.x.subspan(i), b.y.subspan(i), b.px.subspan(i), b.py.subspan(i)}, h, coupling, lambda,
                      steps);
  }
}

// Lanes carry four consecutive nodes; the phasor advances by a fixed rotation
// and is re-anchored with exact cos/sin at the start of every block.
std::complex<double> phasor_trapezoid(std::span<const double> f, double nu0, double dnu, double t) {
  constexpr std::size_t kBlock = 64;
  const std::size_t n = f.size();
  if (n < 8) return scalar::phasor_trapezoid(f, nu0, dnu, t);

  const double rot_phase = 4.0 * dnu * t;
  const __m256d rot_re = _mm256_set1_pd(std::cos(rot_phase));
  const __m256d rot_im = _mm256_set1_pd(-std::sin(rot_phase));
  __m256d acc_re = _mm256_setzero_pd();
  __m256d acc_im = _mm256_setzero_pd();

  std::size_t i = 0;
  while (i + 4 <= n) {
    alignas(32) double zr[4], zi[4];
    for (int l = 0; l < 4; ++l) {
      const double phase = (nu0 + static_cast<double>(i + l) * dnu) * t;
      zr[l] = std::cos(phase);
      zi[l] = -std::sin(phase);
    }
    __m256d z_re = _mm256_load_pd(zr);
    __m256d z_im = _mm256_load_pd(zi);
    const std::size_t end = std::min(n, i + kBlock);
    for (; i + 4 <= end; i += 4) {
      const __m256d fv = _mm256_loadu_pd(f.data() + i);
      acc_re = _mm256_add_pd(acc_re, _mm256_mul_pd(fv, z_re));
      acc_im = _mm256_add_pd(acc_im, _mm256_mul_pd(fv, z_im));
      const __m256d nr = _mm256_sub_pd(_mm256_mul_pd(z_re, rot_re), _mm256_mul_pd(z_im, rot_im));
      const __m256d ni = _mm256_add_pd(_mm256_mul_pd(z_re, rot_im), _mm256_mul_pd(z_im, rot_re));
      z_re = nr;
      z_im = ni;
    }
  }
  alignas(32) double r[4], m[4];
  _mm256_store_pd(r, acc_re);
  _mm256_store_pd(m, acc_im);
  double re = (r[0] + r[1]) + (r[2] + r[3]);
  double im = (m[0] + m[1]) + (m[2] + m[3]);
  for (; i < n; ++i) {
    const double phase = (nu0 + static_cast<double>(i) * dnu) * t;
    re += f[i] * std::cos(phase);
    im -= f[i] * std::sin(phase);
  }
  // endpoint half weights
  const double p0 = nu0 * t;
  const double p1 = (nu0 + static_cast<double>(n - 1) * dnu) * t;
  re -= 0.5 * (f[0] * std::cos(p0) + f[n - 1] * std::cos(p1));
  im += 0.5 * (f[0] * std::sin(p0) + f[n - 1] * std::sin(p1));
  return {re * dnu, im * dnu};
}

#else

bool compiled() { return false; }

void shear_polynomial(std::span<const double> j, std::span<const double> theta_in, std::span<double> theta_out,
                      std::span<const double> velocity_coeffs, double t) {
  scalar::shear_polynomial(j, theta_in, theta_out, velocity_coeffs, t);
}

void hh_verlet(StateBatch b, double h, double coupling, double lambda, std::size_t steps) {
  scalar::hh_verlet(b, h, coupling, lambda, steps);
}

std::complex<double> phasor_trapezoid(std::span<const double> f, double nu0, double dnu, double t) {
  return scalar::phasor_trapezoid(f, nu0, dnu, t);
}

#endif

}  // namespace cpcell::simd::avx2
