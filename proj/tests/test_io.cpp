#include <clocale>
#include <sstream>

#include "cpcell/io.hpp"
#include "doctest.h"

using namespace cpcell;

TEST_CASE("numbers print in shortest round-trip form") {
  CHECK(io::format(0.1) == "0.1");
  CHECK(io::format(1e-20) == "1e-20");
  CHECK(io::format(-2.5) == "-2.5");
  CHECK(io::format(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(io::format(std::optional<double>{}).empty());
  CHECK(std::stod(io::format(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("grid header round trips through JSON") {
  const GridSpec g(0.1, 0.05, 0.005, {-1.0, 0.25}, {20, 40});
  const auto j = io::grid_to_json(g);
  for (const char* key : {"delta_j", "delta_theta", "hbar_eff", "origin", "extent"}) CHECK(j.contains(key));
  CHECK(io::grid_from_json(nlohmann::json::parse(j.dump())) == g);
  CHECK_THROWS_AS(io::grid_from_json(nlohmann::json{{"delta_j", 1.0}}), Error);
}

TEST_CASE("cell CSV lists every box once with its class") {
  const GridSpec g(1.0, 1.0, 1.0, {0.0, 0.0}, {5, 5});
  const Cell c = rasterize(Region::rectangle({1.0, 1.0}, 3.0, 3.0), g);
  std::ostringstream out;
  io::write_cell_csv(out, c);
  const std::string s = out.str();
  CHECK(s.rfind("i,k,class\n2,2,interior\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 10);
  CHECK(s.find("1,1,frontier\n") != std::string::npos);
}

TEST_CASE("section, classification and amoeba CSV headers") {
  std::vector<std::vector<hh::SectionPoint>> sec{{{0.1, 0.2, 3.0}}, {{-0.1, 0.0, 4.5}, {0.3, 0.1, 9.0}}};
  std::ostringstream a;
  io::write_section_csv(a, sec);
  CHECK(a.str() == "seed_id,y,py,t\n0,0.1,0.2,3\n1,-0.1,0,4.5\n1,0.3,0.1,9\n");

  std::vector<hh::OrbitClass> orbits(2);
  orbits[0].seed = {0.1, 0.2, 0.0};
  orbits[1].label = hh::OrbitLabel::chaotic;
  orbits[1].ftle = std::numeric_limits<double>::infinity();
  std::ostringstream b;
  io::write_classification_csv(b, orbits);
  CHECK(b.str() == "seed_id,y0,py0,ftle,label\n0,0.1,0.2,0,regular\n1,0,0,inf,chaotic\n");

  hh::AmoebaSeries series;
  series.steps.push_back({0, 0.5});
  series.steps.push_back({1, std::nullopt});
  std::ostringstream c;
  io::write_amoeba_csv(c, series);
  CHECK(c.str() == "n_return,omega\n0,0.5\n1,\n");
}

TEST_CASE("tabulated kernels round trip through CSV") {
  decoherence::Tabulated t{{-1.0, 0.0, 1.0}, {0.0, 0.5, 0.0}};
  std::ostringstream out;
  io::write_tabulated_csv(out, t);
  std::istringstream in(out.str());
  const auto back = io::read_tabulated_csv(in);
  CHECK(back.nu == t.nu);
  CHECK(back.f == t.f);

  std::istringstream crlf("nu,f\r\n0,1\r\n1,2\r\n");
  CHECK(io::read_tabulated_csv(crlf).f == std::vector<double>{1.0, 2.0});
  for (const char* bad : {"", "x,y\n1,2\n", "nu,f\n1\n", "nu,f\n1,2,3\n", "nu,f\n1,abc\n"}) {
    std::istringstream s(bad);
    try {
      io::read_tabulated_csv(s);
      FAIL("expected ParseError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ParseError);
    }
  }
}

TEST_CASE("expectation CSV and section SVG") {
  std::vector<io::ExpectationRow> rows{{0.0, {1.0, 0.0}, 0.3}, {1.0, {0.8, -0.25}, 0.1}};
  std::ostringstream out;
  io::write_expectation_csv(out, rows);
  CHECK(out.str() == "t,re,im,envelope\n0,1,0,0.3\n1,0.8,-0.25,0.1\n");
  std::vector<std::vector<hh::SectionPoint>> sec{{{0.1, 0.2, 3.0}}};
  std::ostringstream svg;
  io::write_section_svg(svg, sec, {-0.5, 1.0, 0.5});
  CHECK(svg.str().find("<circle") != std::string::npos);
  CHECK(svg.str().find("</svg>") != std::string::npos);
}
