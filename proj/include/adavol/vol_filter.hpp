#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "adavol/garch.hpp"
#include "adavol/linalg.hpp"

namespace adavol {

/// Which parameter vector the derivatives are taken with respect to:
/// full = (omega, alpha, beta), dimension p+q+1; vte = (alpha, beta), dimension p+q.
enum class Parameterization { full, vte };

inline constexpr double kVarianceFloor = 1e-12;

/// Conditional-variance recursion with its parameter gradient (and optionally
/// its Hessian), driven one observation at a time.
///
/// Each time step t is two calls: `predict` computes sigma2_t and its
/// derivatives from the lag buffers (X_{t-1..t-p}, sigma2_{t-1..t-q}); then
/// `observe(X_t)` pushes X_t^2 and that prediction into the buffers.
///
/// Lags that have not been filled yet take the pre-sample value: the constant
/// `presample` in full mode, the current gamma2 in VTE mode (so their
/// contribution vanishes). Their derivatives are zero.
class VolFilter {
 public:
  VolFilter(ModelOrder order, Parameterization mode, double presample = 0.0,
            bool with_hessian = false);

  [[nodiscard]] ModelOrder order() const noexcept { return order_; }
  [[nodiscard]] Parameterization mode() const noexcept { return mode_; }
  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] bool has_hessian() const noexcept { return with_hessian_; }
  /// Number of observations pushed so far.
  [[nodiscard]] std::size_t steps() const noexcept { return steps_; }

  /// sigma2_t = omega + sum alpha_i X2_{t-i} + sum beta_j sigma2_{t-j}.
  /// Throws ModeMismatch for a VTE filter or a different model order.
  double predict(const GarchParams& params);
  /// sigma2_t = gamma2 + sum alpha_i (X2_{t-i} - gamma2) + sum beta_j (sigma2_{t-j} - gamma2).
  double predict(const VteParams& params);

  /// Sets the pending prediction directly with zero derivatives.
  void prime(double variance);

  /// Pushes X_t^2 and the pending prediction into the lag buffers. Without a
  /// pending prediction only X_t^2 is pushed (pre-sample observation).
  void observe(double x);

  /// observe(x_prev) followed by predict(params).
  double variance_step_full(const GarchParams& params, double x_prev);
  double variance_step_vte(const VteParams& params, double x_prev);

  /// The pending prediction sigma2_t and its derivatives.
  [[nodiscard]] double variance() const noexcept { return variance_; }
  [[nodiscard]] std::span<const double> gradient() const noexcept { return gradient_; }
  /// Same as gradient(), checking the caller's expected parameterization.
  [[nodiscard]] std::span<const double> gradient(Parameterization expected) const;
  /// Requires `with_hessian`.
  [[nodiscard]] const Matrix& hessian() const;

 private:
  template <typename Coeffs>
  double predict_impl(const Coeffs& alpha, const Coeffs& beta, double omega, double gamma2);

  [[nodiscard]] std::size_t x_slot(std::size_t lag) const noexcept { return (x_head_ + lag) % order_.p; }
  [[nodiscard]] std::size_t v_slot(std::size_t lag) const noexcept { return (v_head_ + lag) % order_.q; }

  ModelOrder order_;
  Parameterization mode_;
  std::size_t dim_;
  double presample_;
  bool with_hessian_;

  // Ring buffers: lag 0 lives at *_head_.
  std::vector<double> lag_x2_;
  std::vector<double> lag_v_;
  std::vector<double> lag_dv_;      // q slots of dim_ values
  std::vector<Matrix> lag_d2v_;     // q slots
  std::size_t x_head_ = 0;
  std::size_t v_head_ = 0;
  std::size_t x_filled_ = 0;
  std::size_t v_filled_ = 0;

  bool pending_ = false;
  double variance_ = 0.0;
  std::vector<double> gradient_;
  Matrix hessian_;
  std::size_t steps_ = 0;
};

}  // namespace adavol
