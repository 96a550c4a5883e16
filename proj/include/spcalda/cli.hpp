#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spcalda {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;  // bad flags or flag combinations
inline constexpr int kExitData = 2;   // unreadable input, degenerate data, failed checks

/// Subcommands: fit, predict, cv, simulate, bench, verify.
int cli_main(int argc, char** argv);

/// Same as cli_main with explicit streams; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "0.5,2,inf" -> {0.5, 2, kGammaInfinity}
std::vector<double> parse_gamma_list(const std::string& text);

/// "1-3,7" -> {1, 2, 3, 7}
std::vector<long> parse_int_list(const std::string& text);

}  // namespace spcalda
