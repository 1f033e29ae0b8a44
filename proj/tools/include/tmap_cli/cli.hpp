#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace tmap::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitMalformedInput = 2,
  kExitFitFailure = 3,
  kExitConfig = 4,
  kExitMapVersion = 5,
};

/// Runs the tmap command line. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tmap::cli
