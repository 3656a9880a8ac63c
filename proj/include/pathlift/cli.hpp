#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pathlift {

/// Runs one command line (program name excluded). Returns 0 on success, 1 on
/// a domain error, 2 on a usage error.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Shortest decimal form that reads back to the same double.
std::string format_number(double v);

}  // namespace pathlift
