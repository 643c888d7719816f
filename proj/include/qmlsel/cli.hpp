#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace qmlsel {

/// Process exit codes of the command-line tool.
namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kParse = 2;
inline constexpr int kConstraint = 3;
inline constexpr int kAllModelsFailed = 4;
inline constexpr int kConfig = 5;
}  // namespace exit_code

/// Version string of the library ("0.1.0").
std::string version();

/// Entry point of the `qmlsel` tool. Never throws; errors are reported on
/// `err` and mapped to the exit codes above.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qmlsel
