#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qlink {

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitRuntime = 2,
  kExitAcceptance = 3,
};

/// Runs the command line `args` (without the program name); report text goes
/// to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// One comparison row of `reproduce`.
struct ReproduceRow {
  std::string id;
  double published;
  double artifact;
  double tolerance;  ///< NaN marks an informational row that cannot fail
  bool pass;
};

/// Valid ids: rates, fidelities, degradations, swap. Throws ConfigError
/// listing them for anything else.
std::vector<ReproduceRow> reproduce_table(const std::string& id);
std::vector<std::string> reproduce_table_ids();

/// printf("%.9g").
std::string format_number(double x);

}  // namespace qlink
