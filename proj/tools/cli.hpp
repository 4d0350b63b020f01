#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dbarw::cli {

enum ExitCode : int { kSuccess = 0, kUsageError = 2, kRuntimeError = 3 };

inline constexpr const char* kOutputDirEnv = "DBARW_OUTPUT_DIR";

inline constexpr std::string_view kCommands[] = {"simulate", "survival", "sweep",
                                                 "width-chain", "domination", "separation",
                                                 "oracle", "gamma", "bounds"};

/// One parsed invocation. Fields not used by `command` keep their defaults.
struct RunSpec {
  std::string command;
  std::string output_path;  // empty: standard output
  std::string format;       // csv | json; empty picks the command's default

  std::string init = "0 1";
  double p = 1.0;
  double b = 1.0;
  std::string p_grid;
  std::string b_grid;
  std::uint64_t seed = 0;
  unsigned jobs = 1;

  std::int64_t max_events = 1'000'000;
  double max_time = std::numeric_limits<double>::infinity();
  std::int64_t width_cap = 0;
  std::int64_t trials = 1000;

  std::int64_t n = 25;                 // domination: number of increments
  std::optional<std::int64_t> split;   // separation: gap offset for the labelled run
  std::int64_t window = 10;            // oracle
  bool compare = false;                // oracle: also run Monte Carlo
  std::optional<double> v;             // gamma: evaluate at v
  std::optional<std::int64_t> u;       // bounds: sum bound
  std::optional<std::int64_t> w0;      // bounds: hitting tail
};

/// Parses `lo:hi:log|lin:count`, a comma list, or a single number.
/// Throws std::invalid_argument on malformed input.
[[nodiscard]] std::vector<double> parse_grid(std::string_view text);

/// Parses and runs; all diagnostics go to `err`. Output goes to the file
/// named by --out (relative paths resolve under $DBARW_OUTPUT_DIR when set),
/// or to `out`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Runs an already-parsed spec. Validates every parameter before any work.
int run(const RunSpec& spec, std::ostream& out, std::ostream& err);

}  // namespace dbarw::cli
