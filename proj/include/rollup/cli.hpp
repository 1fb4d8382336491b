#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rollup::cli {

struct Streams {
    std::istream& in;
    std::ostream& out;
    std::ostream& err;
};

/// Runs the command line given as `args` (without the program name).
/// Exit codes: 0 success, 1 data/scheme error, 2 usage error, 3 smoke-test
/// issues found.
int run(const std::vector<std::string>& args, const Streams& streams);

}  // namespace rollup::cli
