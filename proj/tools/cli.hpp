#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace smsim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;

// Entry point shared by the smsim binary and the CLI tests.  args[0] is the
// program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace smsim::cli
