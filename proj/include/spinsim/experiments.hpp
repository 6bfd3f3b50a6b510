#pragma once

#include "spinsim/config.hpp"
#include "spinsim/output.hpp"
#include "spinsim/spin_model.hpp"

#include <functional>

namespace spinsim {

struct RunOptions {
    int workers = 1;
    std::string output_root;  // prefix for relative output directories
};

/// Parses the experiment block and touches every key it would use, without
/// computing anything.  Throws ConfigError on unknown or malformed keys.
void validate_config(const Config& config);

/// Dispatches to the named experiment and returns its results without
/// writing anything.
ResultRecord run_experiment(const Config& config, const RunOptions& opts);

/// run_experiment + write_result into the configured output directory.
/// Returns the directory written.
std::string run_and_write(const Config& config, const RunOptions& opts);

/// Spin system from the [system] config block: explicit offsets/couplings or
/// seeded uniform disorder (offset_scale, coupling_scale, disorder_seed).
SpinSystem system_from_config(const Config& config);

/// Reference values behind the frozen acceptance constants; `name` selects
/// which oracle to print.  Returns the rendered report.
std::string run_oracle(const std::string& name);

/// Runs fn(task) for task = 0..n_tasks-1 on `workers` threads; results are
/// collected by index so the outcome is independent of scheduling.
void parallel_tasks(int n_tasks, int workers,
                    const std::function<void(int)>& fn);

}  // namespace spinsim
