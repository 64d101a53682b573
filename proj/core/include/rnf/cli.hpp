#pragma once

#include <string>
#include <vector>

namespace rnf::cli {

/// Entry point behind the `rnf` executable. Commands: train, evaluate,
/// predict, simulate, search. Returns 0 on success, 2 for usage or
/// configuration errors, 1 for runtime failures.
int dispatch(const std::vector<std::string>& args);
int dispatch(int argc, const char* const* argv);

}  // namespace rnf::cli
