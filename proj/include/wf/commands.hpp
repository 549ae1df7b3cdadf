#ifndef WF_COMMANDS_HPP
#define WF_COMMANDS_HPP

#include <iosfwd>
#include <string>

#include "wf/config.hpp"

namespace wf {

// CLI verbs as library functions so tests can drive them in-process.
// Return values are process exit codes: 0 success, 1 usage/unexpected,
// 2 config, 3 data, 4 numeric (a seed aborted on non-finite loss).

/// Executes the configured run (continual settings or the convex suite for
/// setting = convex). Writes config_snapshot.cfg, run_log.jsonl,
/// accuracy_matrix.csv, resource_report.csv and summary.json under
/// cfg.output.
int cmd_run(const ExperimentConfig& cfg, std::ostream& out);

/// Runs the fixed convex suite at alpha = alpha_scale/L for each configured
/// mu; writes per-problem trace CSVs and a summary with bound margins.
int cmd_convergence(const ExperimentConfig& cfg, std::ostream& out);

/// mu gridsearch: per-mu validation scores, selected mu, and the selected
/// run's artifacts.
int cmd_gridsearch(const ExperimentConfig& cfg, std::ostream& out);

/// Aggregates every summary.json under `run_dir` into comparison tables and
/// a plot-ready report.csv.
int cmd_report(const std::string& run_dir, std::ostream& out);

} // namespace wf

#endif // WF_COMMANDS_HPP
