#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace thread5d::cli {

// Executes one command-line invocation; `args` excludes the program name.
// Streams are injectable so tests can capture output. Exit codes: 0 success,
// 1 a validation or classification check failed, 2 configuration or parse
// error, 3 numerical failure (invalid metric sample, singular assembled
// metric, integrator step collapse).
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

} // namespace thread5d::cli
