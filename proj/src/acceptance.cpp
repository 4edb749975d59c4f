#include "cpcell/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

#include "cpcell/decoherence.hpp"
#include "cpcell/error.hpp"
#include "cpcell/henon_heiles.hpp"
#include "cpcell/moyal.hpp"
#include "cpcell/partition.hpp"
#include "cpcell/shear.hpp"

namespace cpcell::acceptance {
namespace {

struct Outcome {
  bool passed = false;
  std::string measured;
  std::string expected;
};

std::string num(double x, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << x;
  return s.str();
}

std::vector<double> time_grid(double t0, double t1, int n) {
  std::vector<double> out{0.0};
  for (int k = 0; k < n; ++k) out.push_back(t0 + (t1 - t0) * k / (n - 1));
  return out;
}

double fitted_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0.0, my = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    mx += x[n];
    my += y[n];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    sxy += (x[n] - mx) * (y[n] - my);
    sxx += (x[n] - mx) * (x[n] - mx);
  }
  return sxy / sxx;
}

Outcome shear_law(const Options&) {
  const GridSpec grid(0.1, 0.1, 0.01, {-0.05, -0.05}, {12, 12});
  const Region src = Region::rectangle({0.0, 0.0}, 1.0, 1.0);
  const auto model = HamiltonianModel::quadratic(0.0, 0.0, 0.25);
  // Velocity spread across the cell is 2 a2 J = 0.5, so t in [1, 10] gives 5 to 50 boxes of shear.
  const auto times = time_grid(1.0, 10.0, 10);
  const auto s = omega_growth_phase_averaged(model, src, grid, times, 6);
  double lo = INFINITY, hi = -INFINITY;
  std::vector<double> t, measured;
  for (std::size_t n = 1; n < times.size(); ++n) {
    const double ratio = s.measured_delta_omega[n] / *s.predicted_delta_omega[n];
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    t.push_back(times[n]);
    measured.push_back(s.measured_delta_omega[n]);
  }
  const double predicted_slope = 2.0 * (0.5 / grid.delta_theta()) * (grid.hbar_eff() / src.area());
  const double slope_ratio = fitted_slope(t, measured) / predicted_slope;
  return {lo >= 0.9 && hi <= 1.1 && std::abs(slope_ratio - 1.0) <= 0.1,
          "dOmega/closed form in [" + num(lo) + ", " + num(hi) + "], slope ratio " + num(slope_ratio),
          "ratios in [0.9, 1.1], slope ratio within 10% of 1"};
}

Outcome rigidity(const Options&) {
  const GridSpec grid(0.1, 0.1, 0.01, {0.0, 0.0}, {14, 14});
  const Region src = Region::rectangle({0.2, 0.1}, 1.0, 1.0);
  const auto s = omega_growth(HamiltonianModel::linear(0.0, 0.37), src, grid, time_grid(1.0, 10.0, 10));
  const double tol = 4.0 * grid.hbar_eff() / src.area();
  double worst = 0.0;
  for (const auto& w : s.measured_omega) worst = std::max(worst, std::abs(*w - *s.measured_omega[0]));
  return {worst <= tol, "max |Omega(t) - Omega(0)| = " + num(worst), "<= 4 hbar/VolC = " + num(tol)};
}

Outcome scaling(const Options&) {
  const Region src = Region::rectangle({0.0, 0.0}, 1.0, 1.0);
  const auto model = HamiltonianModel::quadratic(0.0, 0.0, 0.25);
  const std::vector<double> times{0.0, 8.0};
  const auto coarse =
      omega_growth_phase_averaged(model, src, GridSpec(0.1, 0.1, 0.01, {-0.1, -0.1}, {12, 12}), times, 4);
  const auto fine =
      omega_growth_phase_averaged(model, src, GridSpec(0.025, 0.1, 0.0025, {-0.1, -0.1}, {48, 12}), times, 4);
  const double reduction = coarse.measured_delta_omega[1] / fine.measured_delta_omega[1];
  return {std::abs(reduction / 4.0 - 1.0) <= 0.15,
          "hbar 0.01 -> 0.0025 reduces dOmega(8) by " + num(reduction) + "x", "4x within 15%"};
}

Outcome oscillatory(const Options&) {
  const GridSpec grid(0.1, 0.1, 0.01, {0.0, 0.0}, {14, 14});
  const Region src = Region::rectangle({0.0, 0.0}, 1.0, 1.0);
  const auto s =
      omega_growth_phase_averaged(HamiltonianModel::oscillatory(20, 0.3, 0.1), src, grid, time_grid(1.0, 12.0, 12), 3);
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t n = 1; n < s.times.size(); ++n) {
    const double ratio = s.measured_delta_omega[n] / *s.predicted_delta_omega[n];
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  const double last = s.measured_delta_omega.back();
  return {lo >= 0.5 && hi <= 2.0 && last > 3.0,
          "dOmega/(2 Bm t/Theta) in [" + num(lo) + ", " + num(hi) + "], final dOmega " + num(last),
          "ratios in [0.5, 2] while dOmega exceeds 3"};
}

Outcome moyal_laws(const Options& o) {
  const auto reports = moyal::check_laws(200, 5, o.seed);
  std::size_t checked = 0, failures = 0;
  std::string failed;
  for (const auto& r : reports) {
    checked += r.checked;
    failures += r.failures;
    if (!r.passed()) failed += (failed.empty() ? "" : "; ") + r.law;
  }
  return {failures == 0,
          std::to_string(checked) + " exact checks over " + std::to_string(reports.size()) + " laws, " +
              std::to_string(failures) + " failures" + (failed.empty() ? "" : " (" + failed + ")"),
          "exact equality on 200 random pairs up to degree 5"};
}

Outcome decay(const Options&) {
  using namespace decoherence;
  const std::vector<SpectralKernel> kernels{{0.7, Lorentzian{0.3, 1.0}}, {0.4, Gaussian{0.6, 1.0}},
                                            {0.0, Lorentzian{1.0, 0.5}}, {-0.2, Gaussian{1.0, 2.0}}};
  double worst = 0.0;
  for (const auto& k : kernels) {
    const double rate = effective_rate(k);
    for (int n = 0; n < 100; ++n) {
      const double t = 0.2 * n / rate;
      worst = std::max(worst, std::abs(expectation(k, t) - closed_form_expectation(k, t)));
    }
  }
  const SpectralKernel lorentz{0.7, Lorentzian{0.3, 1.0}};
  const double limit = weak_limit(lorentz);
  const double residual = weak_limit_residuals(lorentz).back();
  return {worst < 1e-6 && limit == 0.7 && residual < 1e-12,
          "max closed-form error " + num(worst, 3) + ", weak limit " + num(limit) + ", residual at 40/gamma " +
              num(residual, 3),
          "error < 1e-6 at 100 samples, limit 0.7, residual < 1e-12"};
}

Outcome integrator(const Options&) {
  hh::Params p;
  const hh::State s0 = hh::section_state(0.1, 0.1, p);
  auto drift = [&](double step) {
    hh::Params q = p;
    q.step = step;
    const double e0 = hh::energy(s0, q);
    double worst = 0.0;
    for (const auto& s : hh::integrate(s0, q, 1e4, 50).states) worst = std::max(worst, std::abs(hh::energy(s, q) - e0) / e0);
    return worst;
  };
  const double coarse = drift(1e-3);
  const double fine = drift(5e-4);
  const hh::State fwd = hh::integrate(s0, p, 100.0, 100000).states.back();
  const hh::State back = hh::integrate(fwd, p, -100.0, 100000).states.back();
  const double rev = std::max({std::abs(back.x - s0.x), std::abs(back.y - s0.y), std::abs(back.px - s0.px),
                               std::abs(back.py - s0.py)});
  return {coarse < 1e-5 && coarse / fine >= 3.5 && rev < 1e-8,
          "drift " + num(coarse, 3) + ", halving ratio " + num(coarse / fine) + ", reversibility " + num(rev, 3),
          "drift < 1e-5 over T = 1e4, ratio >= 3.5, reversibility < 1e-8"};
}

Outcome chaos(const Options& o) {
  hh::ClassifierOptions opt;
  opt.threads = o.threads;
  auto fraction = [&](double energy, double lambda, double coupling) {
    hh::Params p;
    p.energy = energy;
    p.lambda = lambda;
    p.coupling = coupling;
    return hh::regular_fraction(p, 32, 500, opt).fraction;
  };
  const double lambda = o.hh_lambda.value_or(1.0 / 3.0);
  const double f12 = fraction(1.0 / 12.0, lambda, 1.0);
  const double f8 = fraction(1.0 / 8.0, lambda, 1.0);
  const double f6 = fraction(1.0 / 6.0, lambda, 1.0);
  const double control = fraction(1.0 / 12.0, 0.0, 0.0);
  return {f12 > f8 && f8 > f6 && f12 >= 0.9 && control == 1.0,
          "fractions " + num(f12) + " > " + num(f8) + " > " + num(f6) + " (lambda " + num(lambda) +
              "), decoupled control " + num(control),
          "strictly decreasing, E = 1/12 fraction >= 0.9, control = 1"};
}

Outcome amoeba(const Options& o) {
  hh::Params p;
  p.energy = 1.0 / 6.0;
  p.lambda = o.hh_lambda.value_or(1.0 / 3.0);
  const GridSpec grid = GridSpec::covering(0.01, 0.01, {-1, -1}, {1, 1});
  const Region cell = Region::rectangle({-0.3043, -0.1071}, 0.1, 0.1);
  hh::AmoebaOptions opt;
  opt.point_budget = 1'000'000;
  const auto res = hh::center_escape_check(cell, p, 30, grid, opt);
  const bool folded = res.series.steps.size() < 31;
  double peak = 0.0;
  bool lost_interior = false;
  for (const auto& st : res.series.steps) {
    if (st.omega) peak = std::max(peak, *st.omega);
    else lost_interior = true;
  }
  const bool blown_up = folded || lost_interior || peak > 1.0;

  hh::Params control = p;
  control.lambda = 0.0;
  control.coupling = 0.0;
  const auto rigid = hh::advect_cell_hh(cell, control, 30, grid, opt);
  const double w0 = *rigid.steps.front().omega;
  double control_peak = 0.0;
  bool bounded = true;
  for (const auto& st : rigid.steps) {
    bounded = bounded && st.omega && *st.omega < 2.0 * w0;
    if (st.omega) control_peak = std::max(control_peak, *st.omega);
  }
  std::string measured = "peak Omega " + num(peak);
  if (folded) measured += ", fold budget hit at return " + std::to_string(res.series.steps.size());
  measured += res.escaped ? ", centre lost at return " + std::to_string(*res.first_return) : ", centre kept";
  measured += "; control Omega " + num(w0) + " -> max " + num(control_peak);
  return {blown_up && res.escaped && bounded, measured,
          "Omega > 1 or fold within 30 returns, centre escape, control < 2x initial"};
}

Outcome partition(const Options& o) {
  const GridSpec grid(0.01, 0.01, 1e-4, {0.0, 0.0}, {100, 100});
  const auto pu = build_partition({Domain::action_interval(-INFINITY, 0.4), Domain{{0.4, -INFINITY}, {INFINITY, 0.6}},
                                   Domain{{0.4, 0.6}, {INFINITY, INFINITY}}},
                                  0.05, grid);
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int n = 0; n < 10000; ++n) {
    double sum = 0.0;
    for (double b : pu.weights({u(rng), u(rng)})) sum += b;
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return {worst <= 1e-12, "max |sum B_i - 1| = " + num(worst, 3) + " over 10^4 points", "<= 1e-12"};
}

using Runner = Outcome (*)(const Options&);

struct Entry {
  Criterion criterion;
  Runner runner;
};

const std::vector<Entry>& entries() {
  static const std::vector<Entry> list{
      {{1, "shear", "quadratic shear law", 10.0}, &shear_law},
      {{2, "rigidity", "linear model rigidity", 5.0}, &rigidity},
      {{3, "scaling", "macroscopic-limit scaling", 30.0}, &scaling},
      {{4, "oscillatory", "oscillatory blow-up", 30.0}, &oscillatory},
      {{5, "moyal", "Moyal algebra laws", 5.0}, &moyal_laws},
      {{6, "decay", "Riemann-Lebesgue decay", 5.0}, &decay},
      {{7, "integrator", "Henon-Heiles integrator", 60.0}, &integrator},
      {{8, "chaos", "Henon-Heiles chaos ordering", 600.0}, &chaos},
      {{9, "amoeba", "amoeboid regime", 300.0}, &amoeba},
      {{10, "partition", "partition of unity", 1.0}, &partition},
  };
  return list;
}

}  // namespace

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list = [] {
    std::vector<Criterion> out;
    for (const auto& e : entries()) out.push_back(e.criterion);
    return out;
  }();
  return list;
}

std::vector<Result> run(const Options& options, const std::function<void(const Result&)>& report) {
  for (const auto& key : options.only) {
    if (std::none_of(entries().begin(), entries().end(), [&](const Entry& e) { return e.criterion.key == key; })) {
      throw Error(ErrorCode::InvalidArgument, "unknown criterion '" + key + "'");
    }
  }
  Options opts = options;
  if (opts.threads == 0) opts.threads = std::max(1u, std::thread::hardware_concurrency());
  std::vector<Result> out;
  for (const auto& e : entries()) {
    if (!options.only.empty() &&
        std::find(options.only.begin(), options.only.end(), e.criterion.key) == options.only.end()) {
      continue;
    }
    Result r;
    r.id = e.criterion.id;
    r.key = e.criterion.key;
    r.title = e.criterion.title;
    r.budget_seconds = e.criterion.budget_seconds;
    const auto start = std::chrono::steady_clock::now();
    try {
      const Outcome o = e.runner(opts);
      r.passed = o.passed;
      r.measured = o.measured;
      r.expected = o.expected;
    } catch (const std::exception& ex) {
      r.passed = false;
      r.measured = std::string("error: ") + ex.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (r.seconds > r.budget_seconds) {
      r.passed = false;
      r.measured += "; runtime over budget";
    }
    if (report) report(r);
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_line(const Result& r) {
  std::ostringstream s;
  s << (r.passed ? "PASS" : "FAIL") << "  [" << r.id << "] " << r.key << " (" << r.title << "): " << r.measured;
  if (!r.expected.empty()) s << " | expected " << r.expected;
  s << " | " << num(r.seconds, 3) << " s of " << num(r.budget_seconds, 3) << " s";
  return s.str();
}

}  // namespace cpcell::acceptance
