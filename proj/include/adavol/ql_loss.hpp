#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "adavol/garch.hpp"
#include "adavol/linalg.hpp"
#include "adavol/vol_filter.hpp"

namespace adavol {

/// Per-observation quasi-likelihood terms.
struct LossEval {
  double loss = 0.0;
  std::vector<double> grad;
  std::optional<Matrix> hess;
};

/// 0.5 * (x^2 / v + log v). Throws NonPositiveVariance for v <= 0.
double loss(double x, double v);

/// dv * (v - x^2) / (2 v^2).
std::vector<double> loss_gradient(double x, double v, std::span<const double> dv);

/// dv dv^T (2x^2 - v) / (2 v^3) + d2v (v - x^2) / (2 v^2).
Matrix loss_hessian(double x, double v, std::span<const double> dv, const Matrix& d2v);

/// Loss, gradient and (when the filter tracks it) Hessian at the filter's
/// pending prediction for observation x.
LossEval evaluate_step(const VolFilter& filter, double x);

struct BatchLoss {
  double value = 0.0;          ///< sum of per-step losses
  std::vector<double> grad;    ///< sum of per-step gradients
};

/// Runs the filter over the whole series from its initialization and sums the
/// losses and gradients. Full mode seeds the pre-sample lags with `presample`.
BatchLoss batch_loss(std::span<const double> series, const GarchParams& params,
                     double presample = 0.0);
/// VTE mode; pre-sample lags sit at gamma2.
BatchLoss batch_loss(std::span<const double> series, const VteParams& params);

/// Loss value only (no gradient bookkeeping).
double batch_loss_value(std::span<const double> series, const GarchParams& params,
                        double presample = 0.0);
double batch_loss_value(std::span<const double> series, const VteParams& params);

/// Sum of the per-step Hessians over the series.
Matrix batch_hessian(std::span<const double> series, const GarchParams& params,
                     double presample = 0.0);
Matrix batch_hessian(std::span<const double> series, const VteParams& params);

/// Smallest eigenvalue of the averaged Hessian (1/w) sum grad^2 l_t over each
/// consecutive non-overlapping window of `window` observations. A trailing
/// partial window is dropped. Throws WindowTooSmall when window < d.
std::vector<double> min_hessian_eig(std::span<const double> series, const GarchParams& params,
                                    std::size_t window, double presample = 0.0);
std::vector<double> min_hessian_eig(std::span<const double> series, const VteParams& params,
                                    std::size_t window);

}  // namespace adavol
