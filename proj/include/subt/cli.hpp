#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace subt::cli {

// Exit codes shared by every subcommand.
enum Exit : int { kOk = 0, kRefuted = 1, kUsage = 2, kInconclusive = 3, kContract = 4 };

inline constexpr const char* kSchema = "subt-cli/1";

/// Runs the command line `args` (args[0] is the program name). All output
/// goes to out/err; the return value is the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace subt::cli
