#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adavol/adavol.hpp"
#include "adavol/batch_qmle.hpp"
#include "adavol/garch.hpp"
#include "adavol/metrics.hpp"

namespace adavol {

/// Where the true parameters and the starting guesses of a run come from.
enum class ParamPolicy { fixed, random };

/// Monte Carlo protocol: `runs` simulated paths of length `n`, each estimated
/// by AdaVol and (optionally) the rolling batch baseline, then scored.
struct ExperimentSpec {
  ModelOrder order{1, 1};
  std::size_t n = 20000;
  std::size_t runs = 100;
  std::uint64_t seed = 0;
  std::size_t burn_in = kDefaultBurnIn;

  ParamPolicy truth_policy = ParamPolicy::random;
  std::optional<GarchParams> truth;  ///< required when truth_policy is fixed
  ParamPolicy init_policy = ParamPolicy::random;
  std::optional<GarchParams> init;  ///< required when init_policy is fixed

  AdaVolConfig adavol;  ///< its order is overwritten by `order`
  RefitSchedule schedule;
  FitOptions fit_options;
  Parameterization batch_mode = Parameterization::full;
  std::vector<double> alphas = default_alpha_grid();
  std::size_t jobs = 1;
  bool run_batch = true;

  /// Throws InvalidConfig.
  void validate() const;

  [[nodiscard]] GarchParams truth_for(std::size_t run) const;
  [[nodiscard]] GarchParams init_for(std::size_t run) const;
  [[nodiscard]] std::uint64_t sim_seed(std::size_t run) const;
};

struct MethodResult {
  /// AdaVol: final (alpha, beta). Batch: final (omega, alpha, beta) in full
  /// mode, (alpha, beta) in VTE mode.
  std::vector<double> theta;
  /// omega of the final estimate (implied for variance-targeted estimates).
  double omega = 0.0;
  EvalReport report;
  double seconds = 0.0;
  std::size_t iterations = 0;    ///< batch only
  std::size_t nonconverged = 0;  ///< batch only
};

struct RunResult {
  std::size_t run = 0;
  std::uint64_t sim_seed = 0;
  GarchParams truth;
  GarchParams init;
  MethodResult adavol;
  std::optional<MethodResult> batch;
};

/// Executes every run, up to spec.jobs concurrently. Results are ordered by
/// run index and depend only on the ExperimentSpec, never on the thread count. The
/// first exception thrown by any run is rethrown after all workers stop.
std::vector<RunResult> run_experiment(const ExperimentSpec& spec);

/// Estimates for a single run; also what run_experiment calls per worker.
RunResult run_single(const ExperimentSpec& spec, std::size_t run);

/// Minimum, quartiles (linear interpolation) and maximum.
struct FiveNumber {
  double min = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double max = 0.0;

  [[nodiscard]] double iqr() const noexcept { return q75 - q25; }
  /// Throws EmptySeries. NaNs are dropped; all-NaN input yields NaNs.
  static FiveNumber of(std::span<const double> values);
};

/// Linear-interpolation quantile of unsorted data, p in [0, 1].
double quantile(std::vector<double> values, double p);

struct MetricSummary {
  std::string method;  ///< "adavol" or "batch"
  std::string metric;  ///< "mpe", "mape", "mae", "qs", or a parameter name
  FiveNumber stats;
};

/// Boxplot aggregates per method for the scores and the final estimates
/// ("omega", "alpha1", ..., "beta1", ...).
std::vector<MetricSummary> summarize(std::span<const RunResult> results);

/// Relative speed of one AdaVol pass against a batch re-fit at every t.
struct BenchRow {
  ModelOrder order;
  std::size_t n = 0;
  double adavol_seconds = 0.0;  ///< fastest of `repeats` passes
  double batch_seconds = 0.0;
  std::size_t batch_fits = 0;
  /// batch_seconds / adavol_seconds; AdaVol is 1.00 by construction.
  [[nodiscard]] double ratio() const noexcept { return batch_seconds / adavol_seconds; }
};

/// Simulates one path of `order` and times (a) a full AdaVol pass and (b) the
/// streaming batch protocol: for every t >= 10 d a warm-started fit on
/// X_1..X_t. Only estimation is timed.
BenchRow bench(ModelOrder order, std::size_t n, std::uint64_t seed, std::size_t repeats = 5,
               const FitOptions& options = {});

}  // namespace adavol
