#pragma once

#include "gwbp/bounds.hpp"
#include "gwbp/critical.hpp"
#include "gwbp/simtree.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gwbp::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kParseError = 2,
  kPreconditionError = 3,
  kSandwichViolation = 4,
};

using Json = nlohmann::ordered_json;

// Inclusive arithmetic grid "start:stop:step".
struct Grid {
  double start = 0.0;
  double stop = 0.0;
  double step = 1.0;

  std::vector<double> values() const;
};

Grid parse_grid(const std::string& text);

struct RunConfig {
  std::string command;
  std::string dist;
  int r = 2;
  std::optional<double> p;
  std::optional<Grid> p_grid;
  std::optional<Grid> b_grid;
  int n = 5;
  std::int64_t reps = 10000;
  std::optional<std::uint64_t> seed;
  std::string format = "table";
  std::string out;
  std::int64_t budget = 10000000;
  unsigned workers = 0;
  std::string quantity = "pc";
  double tol = 1e-12;
};

// Default node budget, overridable through GWBP_BUDGET.
std::int64_t default_budget();

// Parses the command line and runs it; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cmd_pc(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_bounds(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// 17 significant digits, "." separator; non-finite values as nan/inf.
std::string format_real(double v);
std::string csv_field(const std::string& s);

Json critical_json(const std::string& spec, int r, const CriticalResult& c);
Json bounds_json(const BoundsReport& rep);

}  // namespace gwbp::cli
