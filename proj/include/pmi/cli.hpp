#pragma once

#include <string>
#include <vector>

namespace pmi {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitSolverFailure = 3;
inline constexpr int kExitSchema = 64;

// Entry point shared by the binary and the CLI tests.
int run_cli(const std::vector<std::string>& args);

}  // namespace pmi
