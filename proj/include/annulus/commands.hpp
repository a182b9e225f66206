#pragma once

#include "annulus/config.hpp"

namespace annulus {

/// CLI entry points, one per pipeline stage. Each writes its artifacts
/// into config.out_dir and returns a process exit code: 0 success,
/// 2 invalid configuration, 3 numerical failure.
int cmd_melnikov(const RunConfig& config);
int cmd_displacement(const RunConfig& config);
int cmd_fit(const RunConfig& config);
int cmd_search(const RunConfig& config);
int cmd_simulate(const RunConfig& config);
int cmd_report(const RunConfig& config);

} // namespace annulus
