#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cpcell/decoherence.hpp"
#include "cpcell/grid.hpp"
#include "cpcell/henon_heiles.hpp"
#include "cpcell/shear.hpp"
#include "json.hpp"

namespace cpcell::io {

/// Shortest round-trip decimal form, independent of the global locale.
/// Infinities print as `inf` / `-inf`.
std::string format(double x);
std::string format(const std::optional<double>& x);

nlohmann::json grid_to_json(const GridSpec& grid);
GridSpec grid_from_json(const nlohmann::json& j);

/// `i,k,class`, interior rows first.
void write_cell_csv(std::ostream& out, const Cell& cell);
/// `t,omega_measured,delta_omega_predicted,delta_omega_measured`.
void write_omega_series_csv(std::ostream& out, const OmegaSeries& series);
/// `seed_id,y,py,t`.
void write_section_csv(std::ostream& out, std::span<const std::vector<hh::SectionPoint>> sections);
/// `seed_id,y0,py0,ftle,label`.
void write_classification_csv(std::ostream& out, std::span<const hh::OrbitClass> orbits);
/// `n_return,omega`.
void write_amoeba_csv(std::ostream& out, const hh::AmoebaSeries& series);

struct ExpectationRow {
  double t = 0.0;
  std::complex<double> value;
  double envelope = 0.0;
};
/// `t,re,im,envelope`.
void write_expectation_csv(std::ostream& out, std::span<const ExpectationRow> rows);

/// Two-column `nu,f` table. Throws ParseError on a bad header or row.
decoherence::Tabulated read_tabulated_csv(std::istream& in);
void write_tabulated_csv(std::ostream& out, const decoherence::Tabulated& table);

/// Scatter plot of section points, one colour per orbit.
void write_section_svg(std::ostream& out, std::span<const std::vector<hh::SectionPoint>> sections,
                       const hh::SectionBounds& bounds);

}  // namespace cpcell::io
