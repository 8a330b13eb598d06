#ifndef DMOD_TOOLS_CLI_HPP
#define DMOD_TOOLS_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace dmod::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_validation = 1;
inline constexpr int exit_io = 2;

/// Runs the `dmod` command line. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace dmod::cli

#endif // DMOD_TOOLS_CLI_HPP
