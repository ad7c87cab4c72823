#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "adavol/garch.hpp"
#include "adavol/vol_filter.hpp"

namespace adavol {

struct FitOptions {
  std::size_t max_iters = 500;
  /// Stop once the projected-gradient infinity norm of the mean loss is below
  /// this, measured in the scaled coordinates (omega divided by the sample
  /// variance of the series). Above one sample variance the omega component
  /// is taken relative to omega.
  double tol = 1e-6;
  /// Feasible set uses sum(alpha) + sum(beta) <= 1 - margin.
  double margin = 1e-6;
  double omega_floor = 1e-12;
  /// Length of the non-monotone line-search memory.
  std::size_t memory = 10;
};

struct FitResult {
  /// full: (omega, alpha, beta); vte: (alpha, beta).
  std::vector<double> theta;
  Parameterization mode = Parameterization::full;
  ModelOrder order;
  /// Long-run variance used by VTE fits (sample variance of the series).
  double gamma2 = 0.0;
  /// Mean loss L_n / n at the returned point and at the (projected) start.
  double objective = 0.0;
  double start_objective = 0.0;
  double pg_norm = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;

  /// Full-parameter view of the estimate (omega implied for VTE fits).
  [[nodiscard]] GarchParams params() const;
};

/// Bounded QML fit minimizing the mean quasi-likelihood over the feasible set
/// with a spectral projected-gradient method and a non-monotone Armijo line
/// search. Returns the best iterate; `converged` is false when max_iters was
/// hit first. Requires series.size() >= 10 d.
FitResult fit(std::span<const double> series, std::span<const double> theta0, ModelOrder order,
              Parameterization mode, const FitOptions& options = {});

/// Projection onto the fit's feasible set.
std::vector<double> project_feasible(std::span<const double> theta, ModelOrder order,
                                     Parameterization mode, const FitOptions& options);

struct RefitSchedule {
  std::size_t increment = 2000;
  bool warm_start = true;
};

struct RollingResult {
  std::size_t dim = 0;
  /// Row t-1 holds the estimate assigned to time t (piecewise constant).
  std::vector<double> theta;
  /// sigma2_t filtered with the estimate of t's block.
  std::vector<double> variance;
  std::vector<FitResult> fits;
  /// Exclusive end index of the prefix each fit used.
  std::vector<std::size_t> fit_ends;
  std::size_t total_iterations = 0;
  std::size_t nonconverged = 0;

  [[nodiscard]] std::span<const double> row(std::size_t i) const {
    return std::span<const double>(theta).subspan(i * dim, dim);
  }
};

/// Re-fits on the growing prefixes X_1..X_k, k = increment, 2 increment, ...,
/// assigning each fit to the block (k - increment, k]. A trailing partial
/// block is covered by a final fit on the whole series. A series shorter than
/// one increment gets a single fit.
RollingResult rolling_refit(std::span<const double> series, std::span<const double> theta0,
                            ModelOrder order, const RefitSchedule& schedule,
                            Parameterization mode = Parameterization::full,
                            const FitOptions& options = {});

/// Filtered variances sigma2_1..sigma2_n for a fitted parameter vector.
std::vector<double> filtered_variance(std::span<const double> series, const FitResult& fit);

}  // namespace adavol
