#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ksol::cli {

// Parses and runs one command. Exit codes: 0 success, 1 verification failure,
// 2 usage or parameter error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ksol::cli
