// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace gsc {

/// Command-line entry point, callable in-process. args excludes the
/// program name. Returns the process exit code: 0 success, 1 runtime or
/// file failure, 2 invalid input or usage.
int run_cli(const std::vector<std::string>& args);

}  // namespace gsc
