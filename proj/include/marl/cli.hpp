#ifndef MARL_CLI_HPP
#define MARL_CLI_HPP

#include <string>
#include <vector>

namespace marl {

// Operator entry point. Exit codes: 0 success, 1 config error, 2 runtime
// error, 3 completed but degraded (fallback critic was used).
int run_command(const std::vector<std::string>& args);

}  // namespace marl

#endif
