#include <atomic>
#include <cstdlib>
#include <string>

#include "cpcell/simd/kernels.hpp"

namespace cpcell::simd {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Level initial_level() {
  if (const char* env = std::getenv("CPCELL_SIMD"); env != nullptr && std::string(env) == "scalar") {
    return Level::scalar;
  }
  return detected_level();
}

std::atomic<Level>& current() {
  static std::atomic<Level> level{initial_level()};
  return level;
}

}  // namespace

std::string_view to_string(Level level) { return level == Level::avx2 ? "avx2" : "scalar"; }

Level detected_level() { return (avx2::compiled() && cpu_has_avx2()) ? Level::avx2 : Level::scalar; }

Level active_level() { return current().load(std::memory_order_relaxed); }

void set_active_level(Level level) {
  if (level == Level::avx2 && detected_level() != Level::avx2) level = Level::scalar;
  current().store(level, std::memory_order_relaxed);
}

void shear_polynomial(std::span<const double> j, std::span<const double> theta_in, std::span<double> theta_out,
                      std::span<const double> velocity_coeffs, double t) {
  if (active_level() == Level::avx2) avx2::shear_polynomial(j, theta_in, theta_out, velocity_coeffs, t);
  else scalar::shear_polynomial(j, theta_in, theta_out, velocity_coeffs, t);
}

void hh_verlet(StateBatch batch, double h, double coupling, double lambda, std::size_t steps) {
  if (active_level() == Level::avx2) avx2::hh_verlet(batch, h, coupling, lambda, steps);
  else scalar::hh_verlet(batch, h, coupling, lambda, steps);
}

std::complex<double> phasor_trapezoid(std::span<const double> f, double nu0, double dnu, double t) {
  if (active_level() == Level::avx2) return avx2::phasor_trapezoid(f, nu0, dnu, t);
  return scalar::phasor_trapezoid(f, nu0, dnu, t);
}

}  // namespace cpcell::simd
