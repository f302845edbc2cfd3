#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace thermolens {

inline constexpr const char *kVersion = "0.1.0";

// Entry point of the `thermolens` tool. Returns the process exit status:
// 0 on success, 1 on a library error, 2 on a usage error. Output goes to the
// file named by --output, or `out` when none is given; errors go to `err` as
// a single line `error: <kind>: <message>`.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace thermolens
