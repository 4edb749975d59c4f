#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  int status;
  std::string out;
  std::string err;
};

Outcome cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int status = cpcell::cli::run(args, out, err);
  return {status, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cpcell_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const json& config) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << config.dump();
  return p;
}

}  // namespace

TEST_CASE("repeated runs write byte-identical outputs") {
  const fs::path dir = scratch("determinism");
  for (const char* run : {"a", "b"}) {
    const std::string out = (dir / run).string();
    REQUIRE(cli({"--out", out + "/omega", "omega", "--tmax", "4", "--samples", "4", "--phases", "2"}).status == 0);
    REQUIRE(cli({"--out", out + "/hh", "hh", "sections", "--energies", "1/12,1/6", "--resolution", "8", "--crossings",
                 "40"}).status == 0);
    REQUIRE(cli({"--out", out + "/dec", "decohere", "--kernel", "gaussian:0.2,0.8,1", "--samples", "20"}).status == 0);
  }
  for (const auto& entry : fs::recursive_directory_iterator(dir / "a")) {
    if (!entry.is_regular_file()) continue;
    const fs::path other = dir / "b" / fs::relative(entry.path(), dir / "a");
    INFO(entry.path().string());
    CHECK(slurp(entry.path()) == slurp(other));
  }
}

TEST_CASE("manifest lists every output with its hash and size") {
  const fs::path dir = scratch("manifest");
  REQUIRE(cli({"--out", dir.string(), "--seed", "7", "--hbar", "0.04", "shear", "--t", "2"}).status == 0);
  const json m = json::parse(slurp(dir / "manifest.json"));
  CHECK(m.at("module") == "action-angle-flows");
  CHECK(m.at("experiment") == "shear");
  CHECK(m.at("seed") == 7);
  CHECK(m.at("hbar") == 0.04);
  CHECK(m.at("parameters").at("t") == 2.0);
  CHECK(m.at("versions").contains("cpcell"));
  std::vector<std::string> listed;
  for (const auto& f : m.at("files")) {
    const fs::path p = dir / f.at("path").get<std::string>();
    listed.push_back(f.at("path"));
    CHECK(f.at("bytes") == fs::file_size(p));
    CHECK(f.at("sha256") == cpcell::cli::sha256_file(p.string()));
  }
  std::sort(listed.begin(), listed.end());
  CHECK(listed == std::vector<std::string>{"cell.csv", "grid.json"});
}

TEST_CASE("sha256 of a known string") {
  const fs::path dir = scratch("sha");
  std::ofstream(dir / "abc.txt", std::ios::binary) << "abc";
  CHECK(cpcell::cli::sha256_file((dir / "abc.txt").string()) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("a config file reproduces the same run as the command line") {
  const fs::path dir = scratch("config");
  const json config{{"name", "decay"},
                    {"module", "decoherence"},
                    {"experiment", "decohere"},
                    {"parameters", {{"kernel", "lorentzian:0.7,0.3,1"}, {"samples", 30}}},
                    {"output_dir", (dir / "cfg").string()},
                    {"seed", 3}};
  REQUIRE(cli({"run", write_config(dir, config).string()}).status == 0);
  REQUIRE(cli({"--out", (dir / "flags").string(), "decohere", "--kernel", "lorentzian:0.7,0.3,1", "--samples", "30"})
              .status == 0);
  CHECK(slurp(dir / "cfg" / "expectation.csv") == slurp(dir / "flags" / "expectation.csv"));
  const json m = json::parse(slurp(dir / "cfg" / "manifest.json"));
  CHECK(m.at("name") == "decay");
  CHECK(m.at("seed") == 3);
}

TEST_CASE("invalid configs are rejected by name") {
  const fs::path dir = scratch("invalid");
  const json base{{"name", "m"}, {"module", "moyal"}, {"experiment", "moyal-check"}};

  auto rejected = [&](const json& config, const std::string& fragment) {
    const auto r = cli({"run", write_config(dir, config).string()});
    CHECK(r.status == 2);
    CHECK(r.err.find("ConfigInvalid") != std::string::npos);
    CHECK(r.err.find(fragment) != std::string::npos);
  };
  rejected(json::object(), "non-empty");
  json extra = base;
  extra["colour"] = "red";
  rejected(extra, "'colour'");
  json param = base;
  param["parameters"] = {{"pairz", 3}};
  rejected(param, "'pairz'");
  json wrong_type = base;
  wrong_type["parameters"] = {{"pairs", "many"}};
  rejected(wrong_type, "'pairs'");
  json module = base;
  module["module"] = "decoherence";
  rejected(module, "'module'");
  json experiment = base;
  experiment["experiment"] = "nothing";
  rejected(experiment, "'experiment'");
}

TEST_CASE("usage errors exit with status 2") {
  CHECK(cli({}).status == 2);
  CHECK(cli({"omega", "--bogus"}).status == 2);
  CHECK(cli({"--hbar", "-1", "omega"}).status == 2);
  CHECK(cli({"--help"}).status == 0);
}

TEST_CASE("compute errors exit with status 1") {
  const fs::path dir = scratch("compute");
  const auto r = cli({"--out", dir.string(), "decohere", "--kernel", "lorentzian:0,1,-1"});
  CHECK(r.status == 1);
  CHECK(r.err.find("error:") != std::string::npos);
}

TEST_CASE("moyal check prints every law") {
  const fs::path dir = scratch("moyal");
  const auto r = cli({"--out", dir.string(), "moyal", "check", "--pairs", "10", "--degree", "4"});
  CHECK(r.status == 0);
  std::istringstream lines(r.out);
  int passes = 0;
  for (std::string line; std::getline(lines, line);) passes += line.rfind("PASS", 0) == 0;
  CHECK(passes == 8);
  CHECK(slurp(dir / "moyal_laws.csv").rfind("law,checked,failures\n", 0) == 0);
}

TEST_CASE("decohere writes the expectation table") {
  const fs::path dir = scratch("decohere");
  const auto r = cli({"--out", dir.string(), "decohere", "--kernel", "gaussian:0.2,0.8,1", "--samples", "3", "--tmax",
                      "10"});
  REQUIRE(r.status == 0);
  std::istringstream csv(slurp(dir / "expectation.csv"));
  std::string header, first;
  std::getline(csv, header);
  std::getline(csv, first);
  CHECK(header == "t,re,im,envelope");
  CHECK(first.rfind("0,", 0) == 0);
  CHECK(r.out.find("weak limit 0.2") != std::string::npos);
}

TEST_CASE("suite runs a selected criterion and fails the misconfigured control") {
  const auto ok = cli({"suite", "--only", "moyal"});
  CHECK(ok.status == 0);
  CHECK(ok.out.rfind("PASS  [5] moyal", 0) == 0);

  const auto bad = cli({"suite", "--only", "partition", "--hh-lambda", "1"});
  CHECK(bad.status == 0);

  const auto control = cli({"suite", "--only", "chaos", "--hh-lambda", "1"});
  CHECK(control.status == 1);
  CHECK(control.out.rfind("FAIL  [8] chaos", 0) == 0);

  CHECK(cli({"suite", "--only", "nonsense"}).status == 1);
}

TEST_CASE("shipped scenarios run and produce the documented outputs") {
  const fs::path dir = scratch("scenarios");
  const fs::path scenarios = fs::path(CPCELL_SOURCE_DIR) / "scenarios";

  json omega = json::parse(slurp(scenarios / "omega-shear.json"));
  omega["output_dir"] = (dir / "omega").string();
  REQUIRE(cli({"run", write_config(dir, omega).string()}).status == 0);
  std::istringstream csv(slurp(dir / "omega" / "omega_series.csv"));
  std::string line;
  std::getline(csv, line);
  double previous = -1.0;
  int rows = 0;
  while (std::getline(csv, line)) {
    const double delta = std::stod(line.substr(line.rfind(',') + 1));
    CHECK(delta > previous);
    previous = delta;
    ++rows;
  }
  CHECK(rows == 11);

  json hh = json::parse(slurp(scenarios / "hh-sections.json"));
  hh["output_dir"] = (dir / "hh").string();
  hh["parameters"]["resolution"] = 8;
  hh["parameters"]["crossings"] = 40;
  hh["parameters"]["step"] = 0.01;
  REQUIRE(cli({"run", write_config(dir, hh).string()}).status == 0);
  for (const char* tag : {"1_12", "1_8", "1_6"}) CHECK(fs::exists(dir / "hh" / ("section_E" + std::string(tag) + ".csv")));
  CHECK(fs::exists(dir / "hh" / "fractions.csv"));

  for (const char* name : {"decohere.json", "moyal-check.json", "hh-amoeba.json"}) {
    const json config = json::parse(slurp(scenarios / name));
    CHECK(config.contains("experiment"));
  }
}
