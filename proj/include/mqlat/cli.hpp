#pragma once

#include <iosfwd>
#include <map>
#include <string>

namespace mqlat::cli {

// Exit statuses of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInternal = 3;

// key = value lines, '#' starts a comment. Keys are normalized to use '-'.
// Throws Error(ParseError) naming `source` and the line on malformed input.
std::map<std::string, std::string> parse_config(std::istream& in, const std::string& source);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mqlat::cli
