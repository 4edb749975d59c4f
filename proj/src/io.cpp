#include "cpcell/io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace cpcell::io {

std::string format(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string format(const std::optional<double>& x) { return x ? format(*x) : std::string(); }

nlohmann::json grid_to_json(const GridSpec& grid) {
  return {{"delta_j", grid.delta_j()},
          {"delta_theta", grid.delta_theta()},
          {"hbar_eff", grid.hbar_eff()},
          {"origin", {grid.origin().j, grid.origin().theta}},
          {"extent", {grid.extent()[0], grid.extent()[1]}}};
}

GridSpec grid_from_json(const nlohmann::json& j) {
  try {
    return GridSpec(j.at("delta_j").get<double>(), j.at("delta_theta").get<double>(), j.at("hbar_eff").get<double>(),
                    {j.at("origin").at(0).get<double>(), j.at("origin").at(1).get<double>()},
                    {j.at("extent").at(0).get<std::int64_t>(), j.at("extent").at(1).get<std::int64_t>()});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("grid header: ") + e.what());
  }
}

void write_cell_csv(std::ostream& out, const Cell& cell) {
  out << "i,k,class\n";
  for (const auto& b : cell.interior) out << b.i << ',' << b.k << ",interior\n";
  for (const auto& b : cell.frontier) out << b.i << ',' << b.k << ",frontier\n";
}

void write_omega_series_csv(std::ostream& out, const OmegaSeries& s) {
  out << "t,omega_measured,delta_omega_predicted,delta_omega_measured\n";
  for (std::size_t n = 0; n < s.times.size(); ++n) {
    out << format(s.times[n]) << ',' << format(s.measured_omega[n]) << ',' << format(s.predicted_delta_omega[n])
        << ',' << format(s.measured_delta_omega[n]) << '\n';
  }
}

void write_section_csv(std::ostream& out, std::span<const std::vector<hh::SectionPoint>> sections) {
  out << "seed_id,y,py,t\n";
  for (std::size_t id = 0; id < sections.size(); ++id) {
    for (const auto& p : sections[id]) out << id << ',' << format(p.y) << ',' << format(p.py) << ',' << format(p.t) << '\n';
  }
}

void write_classification_csv(std::ostream& out, std::span<const hh::OrbitClass> orbits) {
  out << "seed_id,y0,py0,ftle,label\n";
  for (std::size_t id = 0; id < orbits.size(); ++id) {
    const auto& o = orbits[id];
    out << id << ',' << format(o.seed.y) << ',' << format(o.seed.py) << ',' << format(o.ftle) << ','
        << (o.label == hh::OrbitLabel::regular ? "regular" : "chaotic") << '\n';
  }
}

void write_amoeba_csv(std::ostream& out, const hh::AmoebaSeries& series) {
  out << "n_return,omega\n";
  for (const auto& s : series.steps) out << s.n_return << ',' << format(s.omega) << '\n';
}

void write_expectation_csv(std::ostream& out, std::span<const ExpectationRow> rows) {
  out << "t,re,im,envelope\n";
  for (const auto& r : rows) {
    out << format(r.t) << ',' << format(r.value.real()) << ',' << format(r.value.imag()) << ',' << format(r.envelope)
        << '\n';
  }
}

namespace {

double parse_number(const std::string& field, std::size_t line) {
  double v = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  while (begin < end && *begin == ' ') ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\r')) --end;
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": not a number: '" + field + "'");
  }
  return v;
}

}  // namespace

decoherence::Tabulated read_tabulated_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "empty table");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "nu,f") throw Error(ErrorCode::ParseError, "expected header 'nu,f', got '" + line + "'");
  decoherence::Tabulated table;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(number) + ": expected two columns");
    }
    table.nu.push_back(parse_number(line.substr(0, comma), number));
    table.f.push_back(parse_number(line.substr(comma + 1), number));
  }
  return table;
}

void write_tabulated_csv(std::ostream& out, const decoherence::Tabulated& table) {
  out << "nu,f\n";
  for (std::size_t n = 0; n < table.nu.size(); ++n) out << format(table.nu[n]) << ',' << format(table.f[n]) << '\n';
}

void write_section_svg(std::ostream& out, std::span<const std::vector<hh::SectionPoint>> sections,
                       const hh::SectionBounds& bounds) {
  const double size = 600.0, pad = 20.0;
  const double w = bounds.y_hi - bounds.y_lo, h = 2.0 * bounds.py_max;
  const double scale = (size - 2.0 * pad) / std::max(w, h);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t id = 0; id < sections.size(); ++id) {
    const double hue = std::fmod(static_cast<double>(id) * 137.508, 360.0);
    out << "<g fill=\"hsl(" << static_cast<int>(hue) << ",70%,40%)\">\n";
    for (const auto& p : sections[id]) {
      const double cx = pad + (p.y - bounds.y_lo) * scale;
      const double cy = size - pad - (p.py + bounds.py_max) * scale;
      out << "<circle cx=\"" << format(cx) << "\" cy=\"" << format(cy) << "\" r=\"0.8\"/>\n";
    }
    out << "</g>\n";
  }
  out << "</svg>\n";
}

}  // namespace cpcell::io
