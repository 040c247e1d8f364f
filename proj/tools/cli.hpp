#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace rankdyn::cli {

/// Runs the command line `args` (program name excluded). Returns 0 on success,
/// 2 on usage errors and 1 on data or validation errors; messages go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rankdyn::cli
