#include "cli.hpp"

#include <openssl/evp.h>

#include <boost/version.hpp>
#include <gsl/gsl_version.h>

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <thread>
#include <type_traits>

#include "cpcell/acceptance.hpp"
#include "cpcell/decoherence.hpp"
#include "cpcell/henon_heiles.hpp"
#include "cpcell/io.hpp"
#include "cpcell/moyal.hpp"
#include "cpcell/shear.hpp"
#include "cpcell/simd/kernels.hpp"
#include "json.hpp"

namespace cpcell::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "1.0.0";

struct Context {
  fs::path out_dir;
  std::uint64_t seed = 0;
  double hbar = 0.01;
  std::ostream& out;
  std::vector<std::string> files;

  void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    fs::create_directories(out_dir);
    std::ofstream f(out_dir / name, std::ios::binary);
    if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write " + (out_dir / name).string());
    body(f);
    f.close();
    files.push_back(name);
  }
};

template <class T>
struct is_vector : std::false_type {};
template <class T>
struct is_vector<std::vector<T>> : std::true_type {};

std::string dashed(std::string key) {
  for (auto& c : key) {
    if (c == '_') c = '-';
  }
  return key;
}

struct CliBinder {
  CLI::App* app;
  template <class T>
  void operator()(const char* key, T& field, const char* help) {
    const std::string name = "--" + dashed(key);
    if constexpr (std::is_same_v<T, bool>) {
      app->add_flag(name, field, help);
    } else {
      auto* opt = app->add_option(name, field, help)->capture_default_str();
      if constexpr (is_vector<T>::value) opt->delimiter(',');
    }
  }
};

struct JsonReader {
  const json& params;
  std::set<std::string> known;
  template <class T>
  void operator()(const char* key, T& field, const char*) {
    known.insert(key);
    if (!params.contains(key)) return;
    try {
      field = params.at(key).get<T>();
    } catch (const json::exception&) {
      throw Error(ErrorCode::ConfigInvalid, "parameter '" + std::string(key) + "' has the wrong type");
    }
  }
};

struct JsonWriter {
  json& j;
  template <class T>
  void operator()(const char* key, const T& field, const char*) {
    j[key] = field;
  }
};

double parse_fraction(const std::string& s) {
  const auto slash = s.find('/');
  try {
    std::size_t used = 0;
    if (slash == std::string::npos) {
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    }
    std::size_t a = 0, b = 0;
    const std::string num = s.substr(0, slash), den = s.substr(slash + 1);
    const double n = std::stod(num, &a), d = std::stod(den, &b);
    if (a != num.size() || b != den.size() || d == 0.0) throw std::invalid_argument(s);
    return n / d;
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::ParseError, "not a number or fraction: '" + s + "'");
  }
}

std::string energy_tag(const std::string& s) {
  std::string tag = s;
  for (auto& c : tag) {
    if (c == '/') c = '_';
  }
  return tag;
}

Region cell_region(const std::vector<double>& cell) {
  if (cell.size() != 4) throw Error(ErrorCode::ParseError, "cell expects j0,theta0,height,width");
  return Region::rectangle({cell[0], cell[1]}, cell[2], cell[3]);
}

GridSpec lattice_around(const Region& region, double hbar, double aspect) {
  if (!(hbar > 0.0) || !(aspect > 0.0)) throw Error(ErrorCode::InvalidGrid, "hbar and aspect must be positive");
  const double dj = std::sqrt(hbar * aspect), dt = hbar / dj;
  PhasePoint lo{INFINITY, INFINITY}, hi{-INFINITY, -INFINITY};
  for (const auto& p : region.boundary()) {
    lo = {std::min(lo.j, p.j), std::min(lo.theta, p.theta)};
    hi = {std::max(hi.j, p.j), std::max(hi.theta, p.theta)};
  }
  const GridSpec g = GridSpec::covering(dj, dt, {lo.j - 0.5 * dj, lo.theta - 0.5 * dt}, {hi.j + 0.5 * dj, hi.theta + 0.5 * dt});
  return GridSpec(dj, dt, hbar, g.origin(), g.extent());
}

std::vector<double> sample_times(double tmax, std::size_t samples) {
  if (!(tmax > 0.0) || samples < 1) throw Error(ErrorCode::InvalidArgument, "need tmax > 0 and samples >= 1");
  std::vector<double> t;
  for (std::size_t k = 0; k <= samples; ++k) t.push_back(tmax * static_cast<double>(k) / static_cast<double>(samples));
  return t;
}

std::size_t pick_threads(std::size_t threads) {
  return threads > 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
}

// Experiments. Each argument struct lists its parameters once; the same list
// drives command-line options, config parsing and the manifest.

struct CellArgs {
  std::vector<double> cell{0.0, 0.0, 1.0, 1.0};
  double aspect = 1.0;
  template <class V>
  void visit(V& v) {
    v("cell", cell, "rectangle j0,theta0,height,width");
    v("aspect", aspect, "box aspect delta_j / delta_theta");
  }
};

bool exec_cell(const CellArgs& a, Context& ctx) {
  const Region r = cell_region(a.cell);
  const GridSpec grid = lattice_around(r, ctx.hbar, a.aspect);
  const Cell c = rasterize(r, grid);
  ctx.write("grid.json", [&](std::ostream& o) { o << io::grid_to_json(grid).dump(2) << '\n'; });
  ctx.write("cell.csv", [&](std::ostream& o) { io::write_cell_csv(o, c); });
  ctx.out << "frontier " << c.frontier.size() << ", interior " << c.interior.size();
  if (!c.interior.empty()) ctx.out << ", Omega " << io::format(omega(c));
  ctx.out << '\n';
  return true;
}

struct OmegaArgs {
  std::string model = "quad:0,0,0.25";
  std::vector<double> cell{0.0, 0.0, 1.0, 1.0};
  double tmax = 10.0;
  std::size_t samples = 10;
  int phases = 1;
  double aspect = 1.0;
  template <class V>
  void visit(V& v) {
    v("model", model, "linear:a0,a1 | quad:a0,a1,a2 | poly:a0,... | osc:m,Bm,deltaJ");
    v("cell", cell, "rectangle j0,theta0,height,width");
    v("tmax", tmax, "last time");
    v("samples", samples, "number of time steps after t = 0");
    v("phases", phases, "average over phases x phases lattice placements");
    v("aspect", aspect, "box aspect delta_j / delta_theta");
  }
};

bool omega_series(const HamiltonianModel& model, const std::vector<double>& cell, double tmax, std::size_t samples,
                  int phases, double aspect, Context& ctx) {
  const Region r = cell_region(cell);
  const GridSpec grid = lattice_around(r, ctx.hbar, aspect);
  const auto times = sample_times(tmax, samples);
  const OmegaSeries s = phases > 1 ? omega_growth_phase_averaged(model, r, grid, times, phases)
                                   : omega_growth(model, r, grid, times);
  ctx.write("grid.json", [&](std::ostream& o) { o << io::grid_to_json(grid).dump(2) << '\n'; });
  ctx.write("omega_series.csv", [&](std::ostream& o) { io::write_omega_series_csv(o, s); });
  ctx.out << "model " << model.to_string() << ", t = " << io::format(times.back()) << ": measured dOmega "
          << io::format(s.measured_delta_omega.back());
  if (s.predicted_delta_omega.back()) ctx.out << ", closed form " << io::format(*s.predicted_delta_omega.back());
  ctx.out << '\n';
  return true;
}

bool exec_omega(const OmegaArgs& a, Context& ctx) {
  return omega_series(HamiltonianModel::parse(a.model), a.cell, a.tmax, a.samples, a.phases, a.aspect, ctx);
}

struct ShearArgs {
  std::string model = "quad:0,0,0.25";
  std::vector<double> cell{0.0, 0.0, 1.0, 1.0};
  double t = 5.0;
  double aspect = 1.0;
  template <class V>
  void visit(V& v) {
    v("model", model, "linear:a0,a1 | quad:a0,a1,a2 | poly:a0,... | osc:m,Bm,deltaJ");
    v("cell", cell, "rectangle j0,theta0,height,width");
    v("t", t, "time of the snapshot");
    v("aspect", aspect, "box aspect delta_j / delta_theta");
  }
};

bool exec_shear(const ShearArgs& a, Context& ctx) {
  const Region r = cell_region(a.cell);
  const Cell c = advect_cell(r, HamiltonianModel::parse(a.model), a.t, lattice_around(r, ctx.hbar, a.aspect));
  ctx.write("grid.json", [&](std::ostream& o) { o << io::grid_to_json(c.grid).dump(2) << '\n'; });
  ctx.write("cell.csv", [&](std::ostream& o) { io::write_cell_csv(o, c); });
  ctx.out << "t = " << io::format(a.t) << ": frontier " << c.frontier.size() << ", interior " << c.interior.size();
  if (!c.interior.empty()) ctx.out << ", Omega " << io::format(omega(c));
  ctx.out << '\n';
  return true;
}

struct OscillateArgs {
  int mode = 20;
  double amplitude = 0.3;
  double delta_j = 0.1;
  std::vector<double> cell{0.0, 0.0, 1.0, 1.0};
  double tmax = 12.0;
  std::size_t samples = 12;
  int phases = 3;
  template <class V>
  void visit(V& v) {
    v("mode", mode, "oscillation mode m");
    v("amplitude", amplitude, "amplitude B_m");
    v("delta_j", delta_j, "action scale of the oscillation");
    v("cell", cell, "rectangle j0,theta0,height,width");
    v("tmax", tmax, "last time");
    v("samples", samples, "number of time steps after t = 0");
    v("phases", phases, "average over phases x phases lattice placements");
  }
};

bool exec_oscillate(const OscillateArgs& a, Context& ctx) {
  return omega_series(HamiltonianModel::oscillatory(a.mode, a.amplitude, a.delta_j), a.cell, a.tmax, a.samples,
                      a.phases, 1.0, ctx);
}

struct HHCommon {
  double lambda = 1.0 / 3.0;
  double coupling = 1.0;
  double step = 1e-3;
  template <class V>
  void visit_common(V& v) {
    v("lambda", lambda, "coefficient of -y^3");
    v("coupling", coupling, "overall factor of the cubic terms");
    v("step", step, "Verlet step");
  }
  hh::Params params(const std::string& energy) const {
    hh::Params p;
    p.lambda = lambda;
    p.coupling = coupling;
    p.step = step;
    p.energy = parse_fraction(energy);
    return p;
  }
};

struct HHSectionsArgs : HHCommon {
  std::vector<std::string> energies{"1/12", "1/8", "1/6"};
  std::size_t resolution = 8;
  std::size_t crossings = 200;
  std::size_t threads = 0;
  bool svg = false;
  template <class V>
  void visit(V& v) {
    v("energies", energies, "section energies, decimals or fractions a/b");
    visit_common(v);
    v("resolution", resolution, "seed grid is resolution x resolution");
    v("crossings", crossings, "section points per orbit");
    v("threads", threads, "worker threads, 0 for all cores");
    v("svg", svg, "also write section_E*.svg");
  }
};

bool exec_hh_sections(const HHSectionsArgs& a, Context& ctx) {
  hh::ClassifierOptions opt;
  opt.threads = pick_threads(a.threads);
  std::vector<std::pair<std::string, hh::RegularFraction>> results;
  for (const auto& e : a.energies) {
    const hh::Params p = a.params(e);
    auto rf = hh::regular_fraction(p, a.resolution, a.crossings, opt);
    std::vector<std::vector<hh::SectionPoint>> sections;
    for (const auto& o : rf.orbits) sections.push_back(o.section);
    const std::string tag = energy_tag(e);
    ctx.write("section_E" + tag + ".csv", [&](std::ostream& o) { io::write_section_csv(o, sections); });
    ctx.write("classification_E" + tag + ".csv",
              [&](std::ostream& o) { io::write_classification_csv(o, rf.orbits); });
    if (a.svg) {
      ctx.write("section_E" + tag + ".svg",
                [&](std::ostream& o) { io::write_section_svg(o, sections, hh::section_bounds(p)); });
    }
    ctx.out << "E = " << e << ": regular fraction " << io::format(rf.fraction) << " of " << rf.orbits.size()
            << " seeds\n";
    results.emplace_back(e, std::move(rf));
  }
  ctx.write("fractions.csv", [&](std::ostream& o) {
    o << "energy,fraction,seeds\n";
    for (const auto& [e, rf] : results) o << io::format(parse_fraction(e)) << ',' << io::format(rf.fraction) << ',' << rf.orbits.size() << '\n';
  });
  return true;
}

struct HHFractionArgs : HHCommon {
  std::string energy = "1/12";
  std::size_t resolution = 32;
  std::size_t crossings = 500;
  std::size_t threads = 0;
  template <class V>
  void visit(V& v) {
    v("energy", energy, "energy, decimal or fraction a/b");
    visit_common(v);
    v("resolution", resolution, "seed grid is resolution x resolution");
    v("crossings", crossings, "section points per orbit");
    v("threads", threads, "worker threads, 0 for all cores");
  }
};

bool exec_hh_fraction(const HHFractionArgs& a, Context& ctx) {
  hh::ClassifierOptions opt;
  opt.threads = pick_threads(a.threads);
  const auto rf = hh::regular_fraction(a.params(a.energy), a.resolution, a.crossings, opt);
  ctx.write("classification.csv", [&](std::ostream& o) { io::write_classification_csv(o, rf.orbits); });
  ctx.write("fractions.csv", [&](std::ostream& o) {
    o << "energy,fraction,seeds\n"
      << io::format(parse_fraction(a.energy)) << ',' << io::format(rf.fraction) << ',' << rf.orbits.size() << '\n';
  });
  ctx.out << "E = " << a.energy << ": regular fraction " << io::format(rf.fraction) << " of " << rf.orbits.size()
          << " seeds\n";
  return true;
}

struct HHAmoebaArgs : HHCommon {
  std::string energy = "1/6";
  std::vector<double> cell{-0.3043, -0.1071, 0.1, 0.1};
  std::size_t returns = 30;
  std::size_t budget = 1'000'000;
  double delta = 0.01;
  template <class V>
  void visit(V& v) {
    v("energy", energy, "energy, decimal or fraction a/b");
    visit_common(v);
    v("cell", cell, "section rectangle y0,py0,height,width");
    v("returns", returns, "number of section returns");
    v("budget", budget, "boundary point budget");
    v("delta", delta, "box width on both section axes");
  }
};

bool exec_hh_amoeba(const HHAmoebaArgs& a, Context& ctx) {
  const hh::Params p = a.params(a.energy);
  const auto b = hh::section_bounds(p);
  const GridSpec grid = GridSpec::covering(a.delta, a.delta, {b.y_lo, -b.py_max}, {b.y_hi, b.py_max});
  hh::AmoebaOptions opt;
  opt.point_budget = a.budget;
  const auto res = hh::center_escape_check(cell_region(a.cell), p, a.returns, grid, opt);
  ctx.write("amoeba.csv", [&](std::ostream& o) { io::write_amoeba_csv(o, res.series); });
  const std::size_t done = res.series.steps.empty() ? 0 : res.series.steps.back().n_return;
  ctx.out << "returns computed " << done << " of " << a.returns;
  if (done < a.returns) ctx.out << " (boundary point budget exceeded)";
  ctx.out << ", centre " << (res.escaped ? "lost at return " + std::to_string(*res.first_return) : "kept") << '\n';
  return true;
}

struct MoyalCheckArgs {
  std::size_t pairs = 200;
  int degree = 5;
  template <class V>
  void visit(V& v) {
    v("pairs", pairs, "random operator pairs");
    v("degree", degree, "maximum degree");
  }
};

bool exec_moyal_check(const MoyalCheckArgs& a, Context& ctx) {
  const auto reports = moyal::check_laws(a.pairs, a.degree, ctx.seed);
  bool ok = true;
  for (const auto& r : reports) {
    ctx.out << (r.passed() ? "PASS  " : "FAIL  ") << r.law << " (" << r.checked - r.failures << "/" << r.checked
            << ")\n";
    ok = ok && r.passed();
  }
  ctx.write("moyal_laws.csv", [&](std::ostream& o) {
    o << "law,checked,failures\n";
    for (const auto& r : reports) o << '"' << r.law << "\"," << r.checked << ',' << r.failures << '\n';
  });
  return ok;
}

struct DecohereArgs {
  std::string kernel = "lorentzian:0.7,0.3,1";
  double tmax = 40.0;
  std::size_t samples = 400;
  double epsilon = 0.01;
  template <class V>
  void visit(V& v) {
    v("kernel", kernel, "lorentzian:A,W,gamma | gaussian:A,W,sigma | table:A,path.csv");
    v("tmax", tmax, "last time, in units of hbar");
    v("samples", samples, "number of time samples");
    v("epsilon", epsilon, "threshold for the decoherence time");
  }
};

decoherence::SpectralKernel parse_kernel(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw Error(ErrorCode::ParseError, "kernel needs 'kind:params': " + spec);
  const std::string kind = spec.substr(0, colon);
  std::vector<std::string> parts;
  std::stringstream ss(spec.substr(colon + 1));
  for (std::string item; std::getline(ss, item, ',');) parts.push_back(item);
  if (kind == "table") {
    if (parts.size() != 2) throw Error(ErrorCode::ParseError, "table expects A,path");
    std::ifstream in(parts[1]);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open " + parts[1]);
    return {parse_fraction(parts[0]), io::read_tabulated_csv(in)};
  }
  if (parts.size() != 3) throw Error(ErrorCode::ParseError, kind + " expects A,W,width");
  const double A = parse_fraction(parts[0]), W = parse_fraction(parts[1]), w = parse_fraction(parts[2]);
  if (kind == "lorentzian") return {A, decoherence::Lorentzian{W, w}};
  if (kind == "gaussian") return {A, decoherence::Gaussian{W, w}};
  throw Error(ErrorCode::ParseError, "unknown kernel kind '" + kind + "'");
}

bool exec_decohere(const DecohereArgs& a, Context& ctx) {
  const auto kernel = parse_kernel(a.kernel);
  kernel.validate();
  if (a.samples < 2 || !(a.tmax > 0.0)) throw Error(ErrorCode::InvalidArgument, "need tmax > 0 and samples >= 2");
  std::vector<io::ExpectationRow> rows;
  for (std::size_t k = 0; k < a.samples; ++k) {
    const double t = a.tmax * static_cast<double>(k) / static_cast<double>(a.samples - 1);
    const auto v = decoherence::expectation(kernel, t);
    rows.push_back({t, v, std::abs(v - kernel.singular_weight)});
  }
  ctx.write("expectation.csv", [&](std::ostream& o) { io::write_expectation_csv(o, rows); });
  const double limit = decoherence::weak_limit(kernel);
  const double td = decoherence::decoherence_time(kernel, a.epsilon);
  ctx.write("decoherence.json", [&](std::ostream& o) {
    o << json{{"weak_limit", limit}, {"decoherence_time", td}, {"epsilon", a.epsilon}}.dump(2) << '\n';
  });
  ctx.out << "weak limit " << io::format(limit) << ", decoherence time " << io::format(td) << " (epsilon "
          << io::format(a.epsilon) << ")\n";
  return true;
}

struct Selected {
  std::string name;
  std::string module;
  std::function<bool(Context&)> exec;
  std::function<json()> parameters;
};

template <class Args>
Selected make_selected(std::string name, std::string module, bool (*exec)(const Args&, Context&), std::shared_ptr<Args> args) {
  return {std::move(name), std::move(module), [args, exec](Context& c) { return exec(*args, c); },
          [args] {
            json j = json::object();
            JsonWriter w{j};
            args->visit(w);
            return j;
          }};
}

// Every experiment: command path, config name, module, runner, description.
template <class F>
void for_each_experiment(F&& f) {
  f(std::type_identity<CellArgs>{}, std::vector<std::string>{"cell"}, "cell", "phase-grid", &exec_cell,
    "rasterize a rectangular cell and report Omega");
  f(std::type_identity<OmegaArgs>{}, std::vector<std::string>{"omega"}, "omega", "action-angle-flows", &exec_omega,
    "Omega growth of a cell under an action-angle model");
  f(std::type_identity<ShearArgs>{}, std::vector<std::string>{"shear"}, "shear", "action-angle-flows", &exec_shear,
    "rasterized image of a cell at one time");
  f(std::type_identity<OscillateArgs>{}, std::vector<std::string>{"oscillate"}, "oscillate", "action-angle-flows",
    &exec_oscillate, "Omega growth under the oscillatory model");
  f(std::type_identity<HHSectionsArgs>{}, std::vector<std::string>{"hh", "sections"}, "hh-sections", "henon-heiles",
    &exec_hh_sections, "Poincare sections and regular fractions at several energies");
  f(std::type_identity<HHFractionArgs>{}, std::vector<std::string>{"hh", "fraction"}, "hh-fraction", "henon-heiles",
    &exec_hh_fraction, "regular fraction at one energy");
  f(std::type_identity<HHAmoebaArgs>{}, std::vector<std::string>{"hh", "amoeba"}, "hh-amoeba", "henon-heiles",
    &exec_hh_amoeba, "carry a section cell through successive returns");
  f(std::type_identity<MoyalCheckArgs>{}, std::vector<std::string>{"moyal", "check"}, "moyal-check", "moyal",
    &exec_moyal_check, "check the correspondence laws exactly");
  f(std::type_identity<DecohereArgs>{}, std::vector<std::string>{"decohere"}, "decohere", "decoherence",
    &exec_decohere, "expectation values of a van Hove kernel over time");
}

const std::set<std::string> kModules{"phase-grid", "action-angle-flows", "henon-heiles", "moyal", "decoherence"};

Selected from_config(const json& config) {
  if (!config.is_object() || config.empty()) throw Error(ErrorCode::ConfigInvalid, "config must be a non-empty object");
  static const std::set<std::string> allowed{"name", "module", "experiment", "parameters", "output_dir", "seed", "hbar"};
  for (const auto& [key, value] : config.items()) {
    if (!allowed.count(key)) throw Error(ErrorCode::ConfigInvalid, "unknown key '" + key + "'");
  }
  for (const char* key : {"name", "module", "experiment"}) {
    if (!config.contains(key) || !config.at(key).is_string()) {
      throw Error(ErrorCode::ConfigInvalid, "key '" + std::string(key) + "' must be a string");
    }
  }
  const std::string module = config.at("module");
  if (!kModules.count(module)) throw Error(ErrorCode::ConfigInvalid, "key 'module': unknown module '" + module + "'");
  const std::string experiment = config.at("experiment");
  const json params = config.value("parameters", json::object());
  if (!params.is_object()) throw Error(ErrorCode::ConfigInvalid, "key 'parameters' must be an object");

  std::optional<Selected> selected;
  for_each_experiment([&](auto tag, const std::vector<std::string>&, const char* name, const char* mod, auto exec,
                          const char*) {
    using Args = typename decltype(tag)::type;
    if (experiment != name) return;
    if (module != mod) {
      throw Error(ErrorCode::ConfigInvalid,
                  "key 'module': experiment '" + experiment + "' belongs to module '" + std::string(mod) + "'");
    }
    auto args = std::make_shared<Args>();
    JsonReader reader{params, {}};
    args->visit(reader);
    for (const auto& [key, value] : params.items()) {
      if (!reader.known.count(key)) throw Error(ErrorCode::ConfigInvalid, "unknown parameter '" + key + "'");
    }
    selected = make_selected<Args>(name, mod, exec, args);
  });
  if (!selected) throw Error(ErrorCode::ConfigInvalid, "key 'experiment': unknown experiment '" + experiment + "'");
  selected->name = config.at("name");
  return *selected;
}

void write_manifest(Context& ctx, const Selected& s, const std::string& experiment) {
  json files = json::array();
  for (const auto& f : ctx.files) {
    const fs::path p = ctx.out_dir / f;
    files.push_back({{"path", f}, {"bytes", fs::file_size(p)}, {"sha256", sha256_file(p.string())}});
  }
  const json manifest{{"name", s.name},
                      {"module", s.module},
                      {"experiment", experiment},
                      {"seed", ctx.seed},
                      {"hbar", ctx.hbar},
                      {"parameters", s.parameters()},
                      {"versions",
                       {{"cpcell", kVersion},
                        {"compiler", __VERSION__},
                        {"boost", BOOST_LIB_VERSION},
                        {"gsl", GSL_VERSION},
                        {"simd", std::string(simd::to_string(simd::active_level()))}}},
                      {"files", files}};
  std::ofstream out(ctx.out_dir / "manifest.json", std::ios::binary);
  out << manifest.dump(2) << '\n';
}

int execute(const Selected& s, const std::string& experiment, Context& ctx) {
  const bool ok = s.exec(ctx);
  write_manifest(ctx, s, experiment);
  return ok ? 0 : 1;
}

}  // namespace

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read " + path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> md(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  EVP_DigestInit_ex(md.get(), EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) EVP_DigestUpdate(md.get(), buf, static_cast<std::size_t>(in.gcount()));
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(md.get(), digest, &len);
  std::ostringstream hex;
  for (unsigned int n = 0; n < len; ++n) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[n]);
  return hex.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graininess of classical cells on an hbar-sized lattice"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  std::string out_dir = "out";
  std::uint64_t seed = 1;
  double hbar = 0.01;
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--seed", seed, "seed for randomized checks")->capture_default_str();
  app.add_option("--hbar", hbar, "box volume of the action-angle lattice")->capture_default_str()->check(
      CLI::PositiveNumber);

  std::optional<Selected> selected;
  std::string selected_experiment;
  std::map<std::string, CLI::App*> groups;
  for_each_experiment([&](auto tag, const std::vector<std::string>& path, const char* name, const char* module,
                          auto exec, const char* description) {
    using Args = typename decltype(tag)::type;
    CLI::App* parent = &app;
    for (std::size_t n = 0; n + 1 < path.size(); ++n) {
      auto& g = groups[path[n]];
      if (!g) {
        g = app.add_subcommand(path[n], path[n] + " experiments");
        g->require_subcommand(1);
        g->fallthrough();
      }
      parent = g;
    }
    auto* sub = parent->add_subcommand(path.back(), description);
    sub->fallthrough();
    auto params = std::make_shared<Args>();
    CliBinder binder{sub};
    params->visit(binder);
    sub->callback([&, params, name, module, exec] {
      selected = make_selected<Args>(name, module, exec, params);
      selected_experiment = name;
    });
  });

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "run a JSON scenario config");
  run_cmd->add_option("config", config_path, "scenario file")->required();
  run_cmd->fallthrough();

  std::vector<std::string> only;
  std::optional<double> hh_lambda;
  std::size_t threads = 0;
  auto* suite = app.add_subcommand("suite", "run the acceptance criteria");
  suite->add_option("--only", only, "criterion keys to run")->delimiter(',');
  suite->add_option("--hh-lambda", hh_lambda, "override lambda in the Henon-Heiles criteria");
  suite->add_option("--threads", threads, "worker threads, 0 for all cores");
  suite->fallthrough();

  std::vector<std::string> argv{"cpcell"};
  argv.insert(argv.end(), args.begin(), args.end());
  std::vector<const char*> cargs;
  for (const auto& a : argv) cargs.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (suite->parsed()) {
      acceptance::Options opt;
      opt.only = only;
      opt.hh_lambda = hh_lambda;
      opt.threads = threads;
      opt.seed = seed;
      bool ok = true;
      acceptance::run(opt, [&](const acceptance::Result& r) {
        out << acceptance::format_line(r) << std::endl;
        ok = ok && r.passed;
      });
      return ok ? 0 : 1;
    }
    Context ctx{out_dir, seed, hbar, out, {}};
    if (run_cmd->parsed()) {
      std::ifstream in(config_path);
      if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot open " + config_path);
      json config;
      try {
        config = json::parse(in);
      } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigInvalid, std::string("not valid JSON: ") + e.what());
      }
      const Selected s = from_config(config);
      try {
        if (config.contains("output_dir")) ctx.out_dir = config.at("output_dir").get<std::string>();
        if (config.contains("seed")) ctx.seed = config.at("seed").get<std::uint64_t>();
        if (config.contains("hbar")) ctx.hbar = config.at("hbar").get<double>();
      } catch (const json::exception&) {
        throw Error(ErrorCode::ConfigInvalid, "keys 'output_dir', 'seed', 'hbar' must be string, integer, number");
      }
      if (!(ctx.hbar > 0.0)) throw Error(ErrorCode::ConfigInvalid, "key 'hbar' must be positive");
      return execute(s, config.at("experiment").get<std::string>(), ctx);
    }
    selected->name = selected_experiment;
    return execute(*selected, selected_experiment, ctx);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::ConfigInvalid ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace cpcell::cli
