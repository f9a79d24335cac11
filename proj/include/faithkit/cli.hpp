#pragma once

#include <string>
#include <vector>

namespace faithkit {

// Runs one subcommand; args excludes the program name. Returns 0 on success,
// 1 on usage errors and 2 on data or contract errors.
int dispatch(const std::vector<std::string>& args);

// Metric names accepted by `score`.
const std::vector<std::string>& metric_names();

}  // namespace faithkit
