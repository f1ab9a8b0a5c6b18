// Command dispatch for the mmsim tool.
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mms::cli {

inline constexpr int kExitClean = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitUsage = 2;

// args excludes the program name. Reports go to out, diagnostics to err.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mms::cli
