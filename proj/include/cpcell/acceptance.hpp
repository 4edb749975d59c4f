#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace cpcell::acceptance {

struct Options {
  /// Keys of the criteria to run; empty runs all of them.
  std::vector<std::string> only;
  /// Replaces lambda = 1/3 in the Henon-Heiles criteria (negative control).
  std::optional<double> hh_lambda;
  std::size_t threads = 0;  // 0 picks the hardware concurrency
  std::uint64_t seed = 20240;
};

struct Result {
  int id = 0;
  std::string key;
  std::string title;
  bool passed = false;
  std::string measured;
  std::string expected;
  double seconds = 0.0;
  double budget_seconds = 0.0;
};

struct Criterion {
  int id;
  std::string key;
  std::string title;
  double budget_seconds;
};

const std::vector<Criterion>& criteria();

/// Runs the selected criteria in order, calling `report` after each one.
/// Throws InvalidArgument for an unknown key in `only`.
std::vector<Result> run(const Options& options, const std::function<void(const Result&)>& report = {});

/// `PASS  3 scaling  ...` one-line summary.
std::string format_line(const Result& r);

}  // namespace cpcell::acceptance
