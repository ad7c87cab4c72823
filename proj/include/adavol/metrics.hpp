#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace adavol {

/// Standard normal quantile function (Wichura's AS 241, ~1e-16 relative).
/// Throws DomainError outside (0, 1).
double norm_inv_cdf(double p);

/// Mean percentage error (1/n) sum (sigma_t - est_t) / sigma_t on volatilities.
double mpe(std::span<const double> true_vol, std::span<const double> est_vol);

/// Mean absolute percentage error (1/n) sum |sigma_t - est_t| / sigma_t.
double mape(std::span<const double> true_vol, std::span<const double> est_vol);

/// Mean absolute error of the variance against squared returns,
/// (1/n) sum |r_t^2 - est_var_t|.
double mae_var(std::span<const double> returns, std::span<const double> est_var);

/// Pinball loss of the Gaussian alpha-quantile q = norm_inv_cdf(alpha) * vol:
/// alpha (x - q) when x > q, else (1 - alpha) (q - x).
double pinball(double x, double vol, double alpha);

/// (1/n) sum_t sum_m pinball(r_t, est_vol_t, alpha_m).
double qs_score(std::span<const double> returns, std::span<const double> est_vol,
                std::span<const double> alphas);

/// {0.01, 0.02, ..., 0.99}.
std::vector<double> default_alpha_grid();

struct EvalReport {
  double mpe = 0.0;   ///< NaN when no true volatility was supplied
  double mape = 0.0;  ///< NaN when no true volatility was supplied
  double mae = 0.0;
  double qs = 0.0;
  std::size_t n = 0;
  std::vector<double> alphas;

  [[nodiscard]] std::string to_json() const;
  /// "n,mpe,mape,mae,qs"
  [[nodiscard]] std::string to_csv_row() const;
  static std::string csv_header();
};

/// Scores a variance forecast. `true_var` is optional (simulated data only).
EvalReport evaluate(std::span<const double> returns, std::span<const double> est_var,
                    std::optional<std::span<const double>> true_var,
                    std::span<const double> alphas);

}  // namespace adavol
