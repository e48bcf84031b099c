#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "relumip/encode.hpp"
#include "relumip/milp.hpp"

namespace relumip::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsage = 1,
  kInfeasible = 2,
  kLimitWithIncumbent = 3,
  kLimitWithoutIncumbent = 4,
};

/// Runs one command. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Box literal: "[lo,hi]" per dimension ("[-1,1] [0,2]", "[-1,1]x[0,2]" or a
/// JSON array of pairs), or the path of a JSON file holding such an array. A
/// single interval is repeated when `dims` asks for more.
Box parse_box(const std::string& text, int dims);

int exit_code(MilpStatus status);

/// Writes `content` to a temporary file next to `path` and renames it into place.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace relumip::cli
