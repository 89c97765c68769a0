#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace treealg {

/** Runs the `treealgebra` command line. Returns 0 on success, 1 on usage
 *  errors and 2 on input or computation errors. */
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace treealg
