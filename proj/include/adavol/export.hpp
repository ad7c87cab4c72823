#pragma once

#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "adavol/adavol.hpp"
#include "adavol/batch_qmle.hpp"
#include "adavol/experiment.hpp"
#include "adavol/garch.hpp"

namespace adavol {

/// Column names for a parameter vector, e.g. omega,alpha1,beta1.
std::vector<std::string> parameter_columns(ModelOrder order, bool with_omega);

/// t,return,true_vol2
void write_simulation_csv(std::ostream& out, const SimOutput& sim);

/// t,alpha1..,beta1..,gamma2,omega,variance,next_variance where variance is
/// sigma2_t (predicted before X_t) and next_variance is sigma2_{t+1}.
void write_trajectory_csv(std::ostream& out, const StreamResult& result, ModelOrder order);

/// t,[omega,]alpha1..,beta1..,variance with the block estimate in force at t.
void write_rolling_csv(std::ostream& out, const RollingResult& result, ModelOrder order,
                       Parameterization mode);

/// One row per run and method: run,method,mpe,mape,mae,qs,omega,seconds.
void write_runs_csv(std::ostream& out, std::span<const RunResult> results);

/// method,metric,min,q25,median,q75,max
void write_summary_csv(std::ostream& out, std::span<const MetricSummary> summary);

/// order,n,adavol_seconds,batch_seconds,batch_fits,adavol_ratio,batch_ratio
void write_bench_csv(std::ostream& out, std::span<const BenchRow> rows);

/// JSON description of a parameter set.
std::string params_json(const GarchParams& params);

/// Manifest for simulated runs: order, n, burn-in, base seed, and for each
/// run its seed, true parameters and file name.
std::string simulation_manifest_json(const ExperimentSpec& spec,
                                     std::span<const std::string> files);

/// Per-run results and aggregates of a Monte Carlo comparison.
std::string experiment_json(const ExperimentSpec& spec, std::span<const RunResult> results,
                            std::span<const MetricSummary> summary);

/// Writes `content` to `path`, creating parent directories. Throws
/// std::runtime_error when the file cannot be written.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace adavol
