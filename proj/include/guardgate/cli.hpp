#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace guardgate::cli {

// Exit codes beyond the 0/1/2 analysis contract.
inline constexpr int kExitInputError = 3;  // I/O, parse, schema, training errors
inline constexpr int kExitUsage = 64;

// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace guardgate::cli
