#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace geosid {

/// Entry point of the `geosid` tool. Results go to `out` (or the --out
/// path), diagnostics to `err`. Returns 0 on success, 1 on a validation or
/// usage error, 2 on an I/O error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Same, with args[0] as the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace geosid
