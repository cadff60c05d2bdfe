#pragma once

// Subcommand front end. run() is the whole program minus process plumbing,
// so tests drive it in-process.

#include <ostream>
#include <string>
#include <vector>

#include "antipt/model.hpp"

namespace antipt::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kConfig = 3,
  kNumerical = 4,
};

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// One approximation inequality with its numeric margin.
struct Diagnostic {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool upper = false;  // true: value must stay below limit; false: above
  bool ok = true;
  std::string unit;
};

std::vector<Diagnostic> diagnose(const SystemParams& params);

// Percentage |a - b| / mean(a, b); 0 when both vanish.
double asymmetry_percent(double a, double b);

}  // namespace antipt::cli
