#include "cpcell/decoherence.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <mutex>
#include <numbers>

#include "cpcell/simd/kernels.hpp"

namespace cpcell::decoherence {
namespace {

constexpr double kTarget = 1e-8;
constexpr double kFloor = 1e-12;
constexpr double kTruncation = 1e-2;
constexpr std::size_t kMaxPanels = std::size_t{1} << 23;
constexpr std::size_t kLimit = 2000;

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, what);
}

void silence_gsl() {
  static std::once_flag once;
  std::call_once(once, [] { gsl_set_error_handler_off(); });
}

double table_spacing(const Tabulated& table) {
  return (table.nu.back() - table.nu.front()) / static_cast<double>(table.nu.size() - 1);
}

double trapezoid_abs(const Tabulated& table) {
  double s = 0.0;
  for (std::size_t n = 0; n < table.f.size(); ++n) {
    const double w = (n == 0 || n + 1 == table.f.size()) ? 0.5 : 1.0;
    s += w * std::abs(table.f[n]);
  }
  return s * table_spacing(table);
}

std::function<double(double)> density(const Regular& regular) {
  if (const auto* l = std::get_if<Lorentzian>(&regular)) {
    const double c = l->weight * l->gamma / std::numbers::pi;
    const double g2 = l->gamma * l->gamma;
    return [c, g2](double nu) { return c / (nu * nu + g2); };
  }
  const auto& g = std::get<Gaussian>(regular);
  const double c = g.weight / (g.sigma * std::sqrt(2.0 * std::numbers::pi));
  const double s2 = 2.0 * g.sigma * g.sigma;
  return [c, s2](double nu) { return c * std::exp(-nu * nu / s2); };
}

double gsl_thunk(double x, void* params) {
  return (*static_cast<std::function<double(double)>*>(params))(x);
}

// Integral over the real line of an even density times cos(nu t). The bulk
// [0, cut] is integrated on its own so that long cycles at small t cannot skip
// a narrow peak; the tail uses the cycle-by-cycle Fourier rule.
double even_cosine_transform(const std::function<double(double)>& f, double width, double t) {
  silence_gsl();
  using Workspace = std::unique_ptr<gsl_integration_workspace, decltype(&gsl_integration_workspace_free)>;
  using Table = std::unique_ptr<gsl_integration_qawo_table, decltype(&gsl_integration_qawo_table_free)>;
  std::function<double(double)> fn = f;
  gsl_function g{&gsl_thunk, &fn};
  Workspace work(gsl_integration_workspace_alloc(kLimit), &gsl_integration_workspace_free);
  Workspace cycles(gsl_integration_workspace_alloc(kLimit), &gsl_integration_workspace_free);
  const double cut = 40.0 * width;
  double bulk = 0.0, tail = 0.0, bulk_err = 0.0, tail_err = 0.0;
  int status = 0, tail_status = 0;
  if (t == 0.0) {
    status = gsl_integration_qag(&g, 0.0, cut, 1e-15, 1e-13, kLimit, GSL_INTEG_GAUSS61, work.get(), &bulk, &bulk_err);
    tail_status = gsl_integration_qagiu(&g, cut, 1e-15, 1e-13, kLimit, cycles.get(), &tail, &tail_err);
  } else {
    Table bulk_table(gsl_integration_qawo_table_alloc(std::abs(t), cut, GSL_INTEG_COSINE, 50),
                     &gsl_integration_qawo_table_free);
    status = gsl_integration_qawo(&g, 0.0, 1e-15, 1e-13, kLimit, work.get(), bulk_table.get(), &bulk, &bulk_err);
    Workspace tail_work(gsl_integration_workspace_alloc(kLimit), &gsl_integration_workspace_free);
    Table tail_table(gsl_integration_qawo_table_alloc(std::abs(t), 1.0, GSL_INTEG_COSINE, 50),
                     &gsl_integration_qawo_table_free);
    tail_status = gsl_integration_qawf(&g, cut, 1e-15, kLimit, tail_work.get(), cycles.get(), tail_table.get(), &tail,
                                       &tail_err);
  }
  if ((status != GSL_SUCCESS || tail_status != GSL_SUCCESS) && !(bulk_err + tail_err < kTarget)) {
    throw Error(ErrorCode::QuadratureNotConverged,
                std::string("oscillatory quadrature: ") + gsl_strerror(status != GSL_SUCCESS ? status : tail_status));
  }
  return 2.0 * (bulk + tail);
}

std::vector<double> resample(const Tabulated& table, std::size_t panels) {
  const std::size_t segments = table.nu.size() - 1;
  std::vector<double> out(panels + 1);
  for (std::size_t k = 0; k <= panels; ++k) {
    const std::size_t scaled = k * segments;
    const std::size_t i = scaled / panels;
    if (i >= segments) {
      out[k] = table.f.back();
      continue;
    }
    const double frac = static_cast<double>(scaled % panels) / static_cast<double>(panels);
    out[k] = table.f[i] + frac * (table.f[i + 1] - table.f[i]);
  }
  return out;
}

std::complex<double> tabulated_expectation(const Tabulated& table, double t) {
  const std::size_t segments = table.nu.size() - 1;
  if (t == 0.0) return tabulated_trapezoid(table, 0.0, segments);
  const double span = table.nu.back() - table.nu.front();
  const double max_width = std::numbers::pi / (4.0 * std::abs(t));
  const auto per_segment =
      static_cast<std::size_t>(std::max(1.0, std::ceil(span / max_width / static_cast<double>(segments))));
  const double scale = std::max(1.0, trapezoid_abs(table));

  std::size_t panels = segments * per_segment;
  std::complex<double> coarse = tabulated_trapezoid(table, t, panels);
  std::complex<double> previous_extrapolated{};
  bool have_previous = false;
  while (2 * panels <= kMaxPanels) {
    panels *= 2;
    const std::complex<double> fine = tabulated_trapezoid(table, t, panels);
    const std::complex<double> extrapolated = (4.0 * fine - coarse) / 3.0;
    if (std::abs(fine - coarse) < kTarget * scale) return fine;
    if (have_previous && std::abs(extrapolated - previous_extrapolated) < kTarget * scale) return extrapolated;
    previous_extrapolated = extrapolated;
    have_previous = true;
    coarse = fine;
  }
  throw Error(ErrorCode::QuadratureNotConverged, "trapezoid refinement budget exhausted");
}

}  // namespace

void SpectralKernel::validate() const {
  require(std::isfinite(singular_weight), "singular weight must be finite");
  if (const auto* l = std::get_if<Lorentzian>(&regular)) {
    require(std::isfinite(l->weight) && std::isfinite(l->gamma) && l->gamma > 0.0,
            "Lorentzian needs finite weight and gamma > 0");
  } else if (const auto* g = std::get_if<Gaussian>(&regular)) {
    require(std::isfinite(g->weight) && std::isfinite(g->sigma) && g->sigma > 0.0,
            "Gaussian needs finite weight and sigma > 0");
  } else {
    const auto& tab = std::get<Tabulated>(regular);
    require(tab.nu.size() >= 2 && tab.nu.size() == tab.f.size(), "table needs at least two (nu, f) pairs");
    for (std::size_t n = 0; n < tab.nu.size(); ++n) {
      require(std::isfinite(tab.nu[n]) && std::isfinite(tab.f[n]), "table values must be finite");
      if (n > 0) require(tab.nu[n] > tab.nu[n - 1], "table nu must be strictly increasing");
    }
    const double d = table_spacing(tab);
    for (std::size_t n = 1; n < tab.nu.size(); ++n) {
      const double expected = tab.nu.front() + static_cast<double>(n) * d;
      require(std::abs(tab.nu[n] - expected) <= 1e-9 * std::max(1.0, std::abs(expected)) + 1e-9 * d,
              "table nu must be uniformly spaced");
    }
    require(std::isfinite(trapezoid_abs(tab)), "table is not integrable");
  }
}

double regular_weight(const SpectralKernel& kernel) {
  if (const auto* l = std::get_if<Lorentzian>(&kernel.regular)) return l->weight;
  if (const auto* g = std::get_if<Gaussian>(&kernel.regular)) return g->weight;
  const auto& tab = std::get<Tabulated>(kernel.regular);
  return tabulated_trapezoid(tab, 0.0, tab.nu.size() - 1).real();
}

double effective_rate(const SpectralKernel& kernel) {
  if (const auto* l = std::get_if<Lorentzian>(&kernel.regular)) return l->gamma;
  if (const auto* g = std::get_if<Gaussian>(&kernel.regular)) return g->sigma;
  const auto& tab = std::get<Tabulated>(kernel.regular);
  const auto peak_it = std::max_element(tab.f.begin(), tab.f.end(),
                                        [](double a, double b) { return std::abs(a) < std::abs(b); });
  const double peak = std::abs(*peak_it);
  const auto peak_index = static_cast<std::size_t>(peak_it - tab.f.begin());
  if (peak == 0.0) return 1.0;
  const double half = 0.5 * peak;
  auto crossing = [&](std::size_t from, std::size_t to) {
    if (std::abs(tab.f[to]) >= half && std::abs(tab.f[from]) >= half) return tab.nu[to];
    const double a = std::abs(tab.f[from]), b = std::abs(tab.f[to]);
    return tab.nu[from] + (a - half) / (a - b) * (tab.nu[to] - tab.nu[from]);
  };
  double hi = tab.nu.back(), lo = tab.nu.front();
  for (std::size_t n = peak_index; n + 1 < tab.f.size(); ++n) {
    if (std::abs(tab.f[n + 1]) < half) {
      hi = crossing(n, n + 1);
      break;
    }
  }
  for (std::size_t n = peak_index; n > 0; --n) {
    if (std::abs(tab.f[n - 1]) < half) {
      lo = crossing(n, n - 1);
      break;
    }
  }
  return 2.0 / (hi - lo);
}

std::complex<double> tabulated_trapezoid(const Tabulated& table, double t, std::size_t panels) {
  require(table.nu.size() >= 2 && table.nu.size() == table.f.size(), "table needs at least two (nu, f) pairs");
  require(panels >= 1, "panel count must be positive");
  const double span = table.nu.back() - table.nu.front();
  const std::vector<double> samples =
      panels == table.nu.size() - 1 ? table.f : resample(table, panels);
  return simd::phasor_trapezoid(samples, table.nu.front(), span / static_cast<double>(panels), t);
}

std::complex<double> expectation(const SpectralKernel& kernel, double t) {
  kernel.validate();
  require(std::isfinite(t), "time must be finite");
  if (const auto* tab = std::get_if<Tabulated>(&kernel.regular)) {
    return kernel.singular_weight + tabulated_expectation(*tab, t);
  }
  return kernel.singular_weight + even_cosine_transform(density(kernel.regular), effective_rate(kernel), t);
}

std::complex<double> closed_form_expectation(const SpectralKernel& kernel, double t) {
  if (const auto* l = std::get_if<Lorentzian>(&kernel.regular)) {
    return kernel.singular_weight + l->weight * std::exp(-l->gamma * std::abs(t));
  }
  if (const auto* g = std::get_if<Gaussian>(&kernel.regular)) {
    return kernel.singular_weight + g->weight * std::exp(-0.5 * g->sigma * g->sigma * t * t);
  }
  throw Error(ErrorCode::NoClosedForm, "tabulated kernels have no closed-form transform");
}

std::vector<double> weak_limit_residuals(const SpectralKernel& kernel) {
  kernel.validate();
  const double rate = effective_rate(kernel);
  std::vector<double> out;
  for (const double k : {10.0, 20.0, 40.0}) {
    out.push_back(std::abs(expectation(kernel, k / rate) - kernel.singular_weight));
  }
  return out;
}

double weak_limit(const SpectralKernel& kernel) {
  kernel.validate();
  if (const auto* tab = std::get_if<Tabulated>(&kernel.regular)) {
    const double peak = std::abs(*std::max_element(tab->f.begin(), tab->f.end(),
                                                   [](double a, double b) { return std::abs(a) < std::abs(b); }));
    const double edge = std::max(std::abs(tab->f.front()), std::abs(tab->f.back()));
    if (peak > 0.0 && edge > kTruncation * peak) {
      throw Error(ErrorCode::NotDecaying, "tabulated f does not vanish at the grid edges, so it is not L1");
    }
  }
  const std::vector<double> r = weak_limit_residuals(kernel);
  for (std::size_t n = 1; n < r.size(); ++n) {
    if (!(r[n] < r[n - 1] || r[n] < kFloor)) {
      throw Error(ErrorCode::NotDecaying, "regular part does not decay at the confirmation times");
    }
  }
  return kernel.singular_weight;
}

std::vector<double> decohered_limit(std::span<const SpectralKernel> kernels) {
  std::vector<double> out;
  out.reserve(kernels.size());
  for (const auto& k : kernels) out.push_back(weak_limit(k));
  return out;
}

double decoherence_time(const SpectralKernel& kernel, double epsilon) {
  kernel.validate();
  require(epsilon > 0.0 && epsilon < 1.0, "epsilon must lie in (0, 1)");
  const double total = std::abs(regular_weight(kernel));
  require(total > 0.0, "regular part has zero total weight");
  const double threshold = epsilon * total;
  auto below = [&](double t) { return std::abs(expectation(kernel, t) - kernel.singular_weight) < threshold; };

  const double rate = effective_rate(kernel);
  const double t0 = 1e-4 / rate;
  double lo = 0.0;
  for (int k = 0; k <= 4 * 27; ++k) {
    const double t = t0 * std::exp2(0.25 * k);
    if (below(t)) {
      double hi = t;
      while (hi - lo > 1e-3 * hi) {
        const double mid = 0.5 * (lo + hi);
        (below(mid) ? hi : lo) = mid;
      }
      return hi;
    }
    lo = t;
  }
  throw Error(ErrorCode::NotDecaying, "regular part never fell below the threshold");
}

double VanHoveMatrix::spacing() const {
  return (omega.back() - omega.front()) / static_cast<double>(omega.size() - 1);
}

std::vector<std::complex<double>> VanHoveMatrix::recombine() const {
  const std::size_t m = size();
  const double d = spacing();
  std::vector<std::complex<double>> out = offdiag;
  for (std::size_t i = 0; i < m; ++i) out[i * m + i] = diagonal[i] / d;
  return out;
}

VanHoveMatrix van_hove_split(std::span<const double> omega, std::span<const std::complex<double>> matrix) {
  const std::size_t m = omega.size();
  require(m >= 2, "omega grid needs at least two points");
  require(matrix.size() == m * m, "matrix must be M x M for an omega grid of size M");
  for (std::size_t i = 1; i < m; ++i) require(omega[i] > omega[i - 1], "omega grid must be increasing");
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      if (std::abs(matrix[i * m + j] - std::conj(matrix[j * m + i])) > 1e-10) {
        throw Error(ErrorCode::NotSelfAdjoint, "O(w, w') differs from conj(O(w', w))");
      }
    }
  }
  VanHoveMatrix out;
  out.omega.assign(omega.begin(), omega.end());
  const double d = out.spacing();
  out.offdiag.assign(matrix.begin(), matrix.end());
  out.diagonal.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    out.diagonal[i] = matrix[i * m + i].real() * d;
    out.offdiag[i * m + i] = 0.0;
  }
  return out;
}

std::vector<std::complex<double>> project(std::span<const std::complex<double>> state, std::size_t n) {
  if (n > state.size()) {
    throw Error(ErrorCode::BasisMismatch, "observable basis is larger than the state dimension");
  }
  std::vector<std::complex<double>> out(state.begin(), state.end());
  std::fill(out.begin() + static_cast<std::ptrdiff_t>(n), out.end(), std::complex<double>{});
  return out;
}

}  // namespace cpcell::decoherence
