#include "cpcell/shear.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "cpcell/simd/kernels.hpp"

namespace cpcell {
namespace {

constexpr std::int64_t kMaxAngleExtent = std::int64_t{1} << 24;

std::vector<double> parse_numbers(std::string_view text, const std::string& spec) {
  std::vector<double> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto token = text.substr(0, comma);
    double value = 0.0;
    const auto* first = token.data();
    const auto* last = token.data() + token.size();
    while (first < last && *first == ' ') ++first;
    if (first < last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
      throw Error(ErrorCode::ParseError, "bad number in model spec '" + spec + "'");
    }
    out.push_back(value);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace

HamiltonianModel HamiltonianModel::polynomial(std::vector<double> coeffs) {
  if (coeffs.empty()) throw Error(ErrorCode::InvalidArgument, "polynomial model needs at least one coefficient");
  for (double c : coeffs) {
    if (!std::isfinite(c)) throw Error(ErrorCode::InvalidArgument, "non-finite coefficient");
  }
  HamiltonianModel m;
  for (std::size_t n = 1; n < coeffs.size(); ++n) m.velocity_coeffs_.push_back(static_cast<double>(n) * coeffs[n]);
  m.model_ = PolynomialHamiltonian{std::move(coeffs)};
  return m;
}

HamiltonianModel HamiltonianModel::oscillatory(int mode, double amplitude, double delta_j) {
  if (mode < 1) throw Error(ErrorCode::InvalidArgument, "oscillatory mode must be >= 1");
  if (!(delta_j > 0.0)) throw Error(ErrorCode::InvalidArgument, "oscillatory delta_J must be positive");
  if (!std::isfinite(amplitude)) throw Error(ErrorCode::InvalidArgument, "non-finite amplitude");
  HamiltonianModel m;
  m.model_ = OscillatoryHamiltonian{mode, amplitude, delta_j};
  return m;
}

HamiltonianModel HamiltonianModel::parse(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw Error(ErrorCode::ParseError, "model spec needs 'kind:params': " + spec);
  const std::string kind = spec.substr(0, colon);
  const auto nums = parse_numbers(std::string_view(spec).substr(colon + 1), spec);
  if (kind == "linear") {
    if (nums.size() != 2) throw Error(ErrorCode::ParseError, "linear expects a0,a1");
    return polynomial(nums);
  }
  if (kind == "quad") {
    if (nums.size() != 3) throw Error(ErrorCode::ParseError, "quad expects a0,a1,a2");
    return polynomial(nums);
  }
  if (kind == "poly") {
    if (nums.empty()) throw Error(ErrorCode::ParseError, "poly expects a0,...");
    return polynomial(nums);
  }
  if (kind == "osc") {
    if (nums.size() != 3 || nums[0] != std::floor(nums[0])) {
      throw Error(ErrorCode::ParseError, "osc expects m,Bm,deltaJ with integer m");
    }
    return oscillatory(static_cast<int>(nums[0]), nums[1], nums[2]);
  }
  throw Error(ErrorCode::ParseError, "unknown model kind '" + kind + "'");
}

std::string HamiltonianModel::to_string() const {
  std::ostringstream os;
  os.precision(17);
  if (const auto* p = as_polynomial()) {
    os << "poly:";
    for (std::size_t n = 0; n < p->coeffs.size(); ++n) os << (n ? "," : "") << p->coeffs[n];
  } else {
    const auto* o = as_oscillatory();
    os << "osc:" << o->mode << ',' << o->amplitude << ',' << o->delta_j;
  }
  return os.str();
}

int HamiltonianModel::degree() const {
  const auto* p = as_polynomial();
  if (p == nullptr) return -1;
  for (std::size_t n = p->coeffs.size(); n-- > 1;) {
    if (p->coeffs[n] != 0.0) return static_cast<int>(n);
  }
  return 0;
}

double HamiltonianModel::velocity(double j) const {
  if (is_polynomial()) {
    double v = 0.0;
    for (std::size_t c = velocity_coeffs_.size(); c-- > 0;) v = v * j + velocity_coeffs_[c];
    return v;
  }
  const auto* o = as_oscillatory();
  return o->amplitude * std::cos(o->mode * j / o->delta_j);
}

double HamiltonianModel::velocity_lipschitz(double j_lo, double j_hi) const {
  if (const auto* o = as_oscillatory()) return std::abs(o->amplitude) * o->mode / o->delta_j;
  const double reach = std::max(std::abs(j_lo), std::abs(j_hi));
  double bound = 0.0;
  double power = 1.0;
  for (std::size_t k = 1; k < velocity_coeffs_.size(); ++k) {
    bound += static_cast<double>(k) * std::abs(velocity_coeffs_[k]) * power;
    power *= reach;
  }
  return bound;
}

FlowState flow_map(const HamiltonianModel& model, FlowState state, double t) {
  return {state.j, state.theta + model.velocity(state.j) * t};
}

void flow_map_batch(const HamiltonianModel& model, std::span<const double> j, std::span<const double> theta,
                    std::span<double> theta_out, double t) {
  if (j.size() != theta.size() || theta.size() != theta_out.size()) {
    throw Error(ErrorCode::InvalidArgument, "flow_map_batch spans differ in length");
  }
  if (model.is_polynomial()) {
    simd::shear_polynomial(j, theta, theta_out, model.velocity_coeffs(), t);
    return;
  }
  for (std::size_t n = 0; n < j.size(); ++n) theta_out[n] = theta[n] + model.velocity(j[n]) * t;
}

std::vector<PhasePoint> advect_boundary(const Region& source, const HamiltonianModel& model, double t,
                                        const GridSpec& grid) {
  const auto& b = source.boundary();
  std::vector<double> js, ths;
  for (std::size_t n = 0; n + 1 < b.size(); ++n) {
    const PhasePoint p = b[n];
    const PhasePoint q = b[n + 1];
    const double dj = std::abs(q.j - p.j);
    const double dth = std::abs(q.theta - p.theta);
    const double lip = model.velocity_lipschitz(std::min(p.j, q.j), std::max(p.j, q.j));
    // Image gaps are bounded by the source gap plus the velocity spread times t.
    const double ratio = std::max(dj / (0.5 * grid.delta_j()), (dth + std::abs(t) * lip * dj) / (0.5 * grid.delta_theta()));
    const auto pieces = static_cast<std::size_t>(std::floor(ratio)) + 1;
    for (std::size_t s = 0; s < pieces; ++s) {
      const double f = static_cast<double>(s) / static_cast<double>(pieces);
      js.push_back(p.j + f * (q.j - p.j));
      ths.push_back(p.theta + f * (q.theta - p.theta));
    }
  }
  js.push_back(js.front());
  ths.push_back(ths.front());
  flow_map_batch(model, js, ths, ths, t);
  std::vector<PhasePoint> image(js.size());
  for (std::size_t n = 0; n < js.size(); ++n) image[n] = {js[n], ths[n]};
  return image;
}

Cell advect_cell(const Region& source, const HamiltonianModel& model, double t, const GridSpec& grid) {
  const auto image = advect_boundary(source, model, t, grid);
  PhasePoint lo{INFINITY, INFINITY}, hi{-INFINITY, -INFINITY};
  for (const auto& p : image) {
    lo = {std::min(lo.j, p.j), std::min(lo.theta, p.theta)};
    hi = {std::max(hi.j, p.j), std::max(hi.theta, p.theta)};
  }
  if (!std::isfinite(lo.theta) || !std::isfinite(hi.theta) ||
      (hi.theta - lo.theta) / grid.delta_theta() > static_cast<double>(kMaxAngleExtent)) {
    throw Error(ErrorCode::RegionOutsideGrid, "advected image exceeds the lattice expansion limit");
  }
  // Only the angle axis grows; the action is conserved.
  const GridSpec window = grid.expanded_to({grid.origin().j, lo.theta}, {grid.origin().j, hi.theta});
  if (window.extent()[1] > kMaxAngleExtent) {
    throw Error(ErrorCode::RegionOutsideGrid, "advected image exceeds the lattice expansion limit");
  }
  return rasterize_polyline(image, window);
}

double predicted_delta_omega(const HamiltonianModel& model, double cell_height, double cell_base,
                             const GridSpec& grid, double t) {
  if (!(cell_height > 0.0) || !(cell_base > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "cell height and base must be positive");
  }
  if (const auto* o = model.as_oscillatory()) {
    return 2.0 * std::abs(o->amplitude) * std::abs(t) / cell_base;
  }
  const int d = model.degree();
  if (d <= 1) return 0.0;
  if (d == 2) {
    const double a2 = model.as_polynomial()->coeffs[2];
    const double v = std::abs(2.0 * a2 * cell_height);
    const double vol_c = cell_height * cell_base;
    return 2.0 * (v / grid.delta_theta()) * (grid.hbar_eff() / vol_c) * std::abs(t);
  }
  throw Error(ErrorCode::NoClosedForm, "no closed-form Omega growth for polynomial degree >= 3");
}

OmegaSeries omega_growth(const HamiltonianModel& model, const Region& source, const GridSpec& grid,
                         std::span<const double> times) {
  if (times.empty() || times.front() != 0.0) {
    throw Error(ErrorCode::InvalidArgument, "times must start at 0");
  }
  for (std::size_t n = 1; n < times.size(); ++n) {
    if (!(times[n] > times[n - 1])) throw Error(ErrorCode::InvalidArgument, "times must be strictly increasing");
  }
  PhasePoint lo{INFINITY, INFINITY}, hi{-INFINITY, -INFINITY};
  for (const auto& p : source.boundary()) {
    lo = {std::min(lo.j, p.j), std::min(lo.theta, p.theta)};
    hi = {std::max(hi.j, p.j), std::max(hi.theta, p.theta)};
  }
  const double height = hi.j - lo.j;
  const double base = hi.theta - lo.theta;
  const double vol_c = source.area();

  OmegaSeries series;
  std::size_t frontier0 = 0;
  for (double t : times) {
    const Cell cell = advect_cell(source, model, t, grid);
    if (series.times.empty()) frontier0 = cell.frontier.size();
    series.times.push_back(t);
    series.frontier_boxes.push_back(cell.frontier.size());
    series.interior_boxes.push_back(cell.interior.size());
    series.measured_omega.push_back(cell.interior.empty() ? std::nullopt : std::optional<double>(omega(cell)));
    series.measured_delta_omega.push_back(
        (static_cast<double>(cell.frontier.size()) - static_cast<double>(frontier0)) * grid.box_volume() / vol_c);
    try {
      series.predicted_delta_omega.push_back(predicted_delta_omega(model, height, base, grid, t));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoClosedForm) throw;
      series.predicted_delta_omega.push_back(std::nullopt);
    }
  }
  return series;
}

OmegaSeries omega_growth_phase_averaged(const HamiltonianModel& model, const Region& source, const GridSpec& grid,
                                        std::span<const double> times, int phases) {
  if (phases < 1) throw Error(ErrorCode::InvalidArgument, "phases must be >= 1");
  const std::size_t n = times.size();
  std::vector<double> omega_sum(n, 0.0), delta_sum(n, 0.0), frontier_sum(n, 0.0), interior_sum(n, 0.0);
  std::vector<int> omega_count(n, 0);
  OmegaSeries first;
  const auto ext = grid.extent();
  for (int a = 0; a < phases; ++a) {
    for (int b = 0; b < phases; ++b) {
      const PhasePoint origin{grid.origin().j - (a + 0.5) / phases * grid.delta_j(),
                              grid.origin().theta - (b + 0.5) / phases * grid.delta_theta()};
      const GridSpec shifted(grid.delta_j(), grid.delta_theta(), grid.hbar_eff(), origin, {ext[0] + 1, ext[1] + 1});
      OmegaSeries s = omega_growth(model, source, shifted, times);
      for (std::size_t m = 0; m < n; ++m) {
        delta_sum[m] += s.measured_delta_omega[m];
        frontier_sum[m] += static_cast<double>(s.frontier_boxes[m]);
        interior_sum[m] += static_cast<double>(s.interior_boxes[m]);
        if (s.measured_omega[m]) {
          omega_sum[m] += *s.measured_omega[m];
          ++omega_count[m];
        }
      }
      if (a == 0 && b == 0) first = std::move(s);
    }
  }
  const double count = static_cast<double>(phases) * phases;
  for (std::size_t m = 0; m < n; ++m) {
    first.measured_delta_omega[m] = delta_sum[m] / count;
    first.frontier_boxes[m] = static_cast<std::size_t>(std::llround(frontier_sum[m] / count));
    first.interior_boxes[m] = static_cast<std::size_t>(std::llround(interior_sum[m] / count));
    first.measured_omega[m] =
        omega_count[m] == phases * phases ? std::optional<double>(omega_sum[m] / count) : std::nullopt;
  }
  return first;
}

double cell_mean(std::span<const WeightedPoint> density, const std::function<double(PhasePoint)>& observable,
                 const GridSpec& grid) {
  if (density.empty()) throw Error(ErrorCode::UnnormalizedDensity, "empty density");
  double total = 0.0;
  PhasePoint lo{INFINITY, INFINITY}, hi{-INFINITY, -INFINITY};
  for (const auto& wp : density) {
    if (!(wp.weight >= 0.0)) throw Error(ErrorCode::InvalidArgument, "density weights must be nonnegative");
    total += wp.weight;
    lo = {std::min(lo.j, wp.point.j), std::min(lo.theta, wp.point.theta)};
    hi = {std::max(hi.j, wp.point.j), std::max(hi.theta, wp.point.theta)};
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(ErrorCode::UnnormalizedDensity, "density weights sum to " + std::to_string(total));
  }
  if (hi.j - lo.j > 3.0 * grid.delta_j() || hi.theta - lo.theta > 3.0 * grid.delta_theta()) {
    throw Error(ErrorCode::InvalidArgument, "density support exceeds one box neighbourhood");
  }
  double mean = 0.0;
  for (const auto& wp : density) mean += wp.weight * observable(wp.point);
  return mean;
}

double cell_mean(std::span<const WeightedPoint> density, const std::function<double(PhasePoint)>& observable,
                 const GridSpec& grid, const HamiltonianModel& model, double t) {
  // validates support and normalization on the initial distribution
  cell_mean(density, [](PhasePoint) { return 0.0; }, grid);
  double mean = 0.0;
  for (const auto& wp : density) {
    const FlowState s = flow_map(model, {wp.point.j, wp.point.theta}, t);
    mean += wp.weight * observable({s.j, s.theta});
  }
  return mean;
}

}  // namespace cpcell
