#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace treedual::cli {

enum ExitCode : int { kPassed = 0, kFailed = 2, kInconclusive = 3, kInputError = 4 };

/// Runs one command; args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace treedual::cli
