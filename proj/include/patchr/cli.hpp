#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace patchr {

// Runs one `patchr` invocation; args excludes the program name. Returns 0 on
// success, 1 on validation or structural failure, 2 on I/O, journal or
// endpoint failure (and on usage errors). Messages go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, std::istream& in);

}  // namespace patchr
