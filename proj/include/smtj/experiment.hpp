#ifndef SMTJ_EXPERIMENT_HPP
#define SMTJ_EXPERIMENT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "smtj/config.hpp"

namespace smtj::run {

struct RunOptions {
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed_override;
  int workers = 0;  // 0 = runtime default; only sweeps parallelize
};

struct RunArtifacts {
  std::vector<std::string> files;  // paths written, echo config included
};

// All runners write a config echo (config_echo.json) plus mode-specific
// files into out_dir. File contents are deterministic for a given spec and
// seed, independent of worker count. On breakdown the runners first write
// whatever partial outputs exist (flagged in the JSON summaries), then
// rethrow so the caller can map the error to an exit code.
//
// simulate: events.csv, sampled.csv (when sample_dt_s set), summary.json.
RunArtifacts run_simulate(const cfg::ExperimentSpec& spec,
                          const RunOptions& opts);

// sweep: one simulate per sweep gain (seed stream derived per point),
// pearson.csv + dwell.csv + sweep.json.
RunArtifacts run_sweep(const cfg::ExperimentSpec& spec, const RunOptions& opts);

// analyze: pair-model predictions per sweep gain, analyze.csv + analyze.json.
// Needs exactly two devices.
RunArtifacts run_analyze(const cfg::ExperimentSpec& spec,
                         const RunOptions& opts);

// anneal: anneal.json + energy.csv. Uses the configured schedule, or a
// default ramp G = 0 .. 0.06 with per-step duration 100 relaxation times.
RunArtifacts run_anneal(const cfg::ExperimentSpec& spec,
                        const RunOptions& opts);

// Absent an explicit sampling step, statistics sample the traces at
// duration / 100000 (documented fallback so summaries stay deterministic).
double effective_sample_dt(const cfg::ExperimentSpec& spec);

// Default annealing ramp for run_anneal; exposed for tests.
anneal::AnnealSchedule default_schedule(const cfg::ExperimentSpec& spec);

}  // namespace smtj::run

#endif
