#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "adavol/garch.hpp"
#include "adavol/vol_filter.hpp"

namespace adavol {

/// Euclidean projection of v onto {x >= 0, sum(x) <= cap}.
std::vector<double> project_capped_simplex(std::span<const double> v, double cap);

/// How the streaming mean is updated.
///   standard: mu_t = ((t-1) mu_{t-1} + X_t) / t with Welford's variance, i.e.
///             the exact sample mean and (1/t) sample variance.
///   shifted:  mu_t = t/(t+1) mu_{t-1} + X_t/(t+1) and
///             gamma2_t = (t-1)/t gamma2_{t-1} + (X_t - mu_t)^2 / t. The first mean is X_1 / 2.
enum class MeanRecursion { standard, shifted };

/// Freeze the parameters once max|theta_t - theta_{t-window}| < tol.
struct EarlyStop {
  double tol = 1e-6;
  std::size_t window = 1000;
};

struct AdaVolConfig {
  ModelOrder order{1, 1};
  double eta = 0.1;
  double eps = 1e-8;
  /// K is realized as sum(theta) <= 1 - margin.
  double margin = 1e-6;
  MeanRecursion mean_recursion = MeanRecursion::standard;
  /// Number of consecutive loss gradients averaged per AdaGrad step.
  std::size_t minibatch = 1;
  std::optional<EarlyStop> early_stop;

  /// Throws InvalidConfig.
  void validate() const;
};

/// Streaming sample mean and variance.
class StreamingMoments {
 public:
  explicit StreamingMoments(MeanRecursion mode = MeanRecursion::standard) : mode_(mode) {}

  void update(double x);

  [[nodiscard]] std::size_t count() const noexcept { return count_; }
  [[nodiscard]] double mean() const noexcept { return mean_; }
  [[nodiscard]] double variance() const noexcept;

 private:
  MeanRecursion mode_;
  std::size_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;        // standard: sum of squared deviations
  double variance_ = 0.0;  // shifted mode: the recursion's own state
};

/// Recursive QML estimator for GARCH(p,q) with variance targeting: AdaGrad
/// steps on the per-observation QL gradient, projected onto K, with the
/// long-run variance tracked by a streaming sample variance.
///
/// Usage: construct with a start vector (alpha, beta), then call update(X_t)
/// for t = 1, 2, ...; each call returns the prediction of sigma2_{t+1}.
class AdaVolEstimator {
 public:
  /// theta0 = (alpha_1..alpha_p, beta_1..beta_q). Infeasible starts are
  /// projected onto K. Throws InvalidConfig on a dimension mismatch.
  AdaVolEstimator(std::span<const double> theta0, const AdaVolConfig& config);

  /// Processes X_t and returns sigma2_{t+1}. Throws NonFiniteInput.
  double update(double x);

  [[nodiscard]] const AdaVolConfig& config() const noexcept { return config_; }
  [[nodiscard]] std::size_t t() const noexcept { return t_; }
  [[nodiscard]] std::span<const double> theta() const noexcept { return theta_; }
  [[nodiscard]] std::span<const double> accum_g2() const noexcept { return accum_g2_; }
  /// Gradient used in the most recent parameter step (zero before any step).
  [[nodiscard]] std::span<const double> last_gradient() const noexcept { return last_gradient_; }
  [[nodiscard]] double mean() const noexcept { return moments_.mean(); }
  /// gamma2_t, before flooring.
  [[nodiscard]] double gamma2() const noexcept { return moments_.variance(); }
  /// sigma2_{t+1}; zero before the first observation.
  [[nodiscard]] double predicted_variance() const noexcept { return pred_vol2_; }
  /// gamma2_t * (1 - sum(theta_t)).
  [[nodiscard]] double implied_omega() const noexcept;
  [[nodiscard]] VteParams params() const;
  [[nodiscard]] bool frozen() const noexcept { return frozen_; }

 private:
  void adagrad_step(std::span<const double> grad);
  void check_early_stop();

  AdaVolConfig config_;
  std::vector<double> theta_;
  std::vector<double> accum_g2_;
  std::vector<double> grad_sum_;
  std::vector<double> last_gradient_;
  std::vector<double> step_buffer_;
  std::size_t batch_count_ = 0;
  StreamingMoments moments_;
  VolFilter filter_;
  VteParams params_;
  std::size_t t_ = 0;
  double pred_vol2_ = 0.0;
  bool frozen_ = false;
  std::vector<std::vector<double>> history_;  // ring of past thetas for early stopping
  std::size_t history_head_ = 0;
};

/// Per-step record of a streaming run, stored column-wise.
struct Trajectory {
  std::size_t dim = 0;
  std::vector<double> theta;          ///< row t-1 holds theta_t (dim values)
  std::vector<double> gamma2;         ///< gamma2_t
  std::vector<double> next_variance;  ///< sigma2_{t+1}

  [[nodiscard]] std::size_t size() const noexcept { return gamma2.size(); }
  [[nodiscard]] std::span<const double> row(std::size_t i) const {
    return std::span<const double>(theta).subspan(i * dim, dim);
  }
};

struct StreamResult {
  Trajectory trajectory;
  /// predicted_variance[t-1] = sigma2_t, computed before X_t was seen. The
  /// first entry is the initialization sigma2_1 = X_1^2.
  std::vector<double> predicted_variance;
  AdaVolEstimator final_state;
};

/// Folds update() over the series.
StreamResult run_stream(std::span<const double> series, std::span<const double> theta0,
                        const AdaVolConfig& config);

}  // namespace adavol
