#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lexmatch {

// Runs the command line (without the program name). Returns 0 when every
// judged metric passes, 2 on a tolerance failure and 1 on usage or runtime
// errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lexmatch
