#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace blendforge::cli {

/// Runs one command line (without the program name). Returns the exit
/// status; errors are reported on err as a single JSON object.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace blendforge::cli
