#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace adavol {

/// Lag orders of a GARCH(p,q) model: p lagged squared returns, q lagged
/// conditional variances. ARCH(p) is the case q = 0.
struct ModelOrder {
  std::size_t p = 1;
  std::size_t q = 1;

  /// Throws InvalidArgument when p + q == 0.
  void validate() const;

  [[nodiscard]] std::size_t vte_dim() const noexcept { return p + q; }
  [[nodiscard]] std::size_t full_dim() const noexcept { return p + q + 1; }

  friend bool operator==(const ModelOrder&, const ModelOrder&) = default;
};

/// Full parameter vector theta = (omega, alpha_1..alpha_p, beta_1..beta_q).
struct GarchParams {
  double omega = 1.0;
  std::vector<double> alpha;
  std::vector<double> beta;

  [[nodiscard]] ModelOrder order() const noexcept { return {alpha.size(), beta.size()}; }

  /// Sum of all alpha and beta coefficients.
  [[nodiscard]] double persistence() const noexcept;

  /// omega / (1 - persistence), only meaningful when persistence < 1.
  [[nodiscard]] double unconditional_variance() const noexcept;

  /// Flattened (omega, alpha..., beta...).
  [[nodiscard]] std::vector<double> to_vector() const;
  static GarchParams from_vector(const std::vector<double>& theta, ModelOrder order);
};

/// Variance-targeting parameterization: (alpha, beta) plus the long-run
/// variance gamma2. omega is implied as gamma2 * (1 - sum(alpha) - sum(beta)).
struct VteParams {
  std::vector<double> alpha;
  std::vector<double> beta;
  double gamma2 = 1.0;

  [[nodiscard]] ModelOrder order() const noexcept { return {alpha.size(), beta.size()}; }
  [[nodiscard]] double persistence() const noexcept;
  [[nodiscard]] double implied_omega() const noexcept { return gamma2 * (1.0 - persistence()); }
  [[nodiscard]] GarchParams to_full() const;

  /// Flattened (alpha..., beta...).
  [[nodiscard]] std::vector<double> coefficients() const;
  static VteParams from_coefficients(const std::vector<double>& theta, ModelOrder order,
                                     double gamma2);
};

/// Returns `params` unchanged when omega > 0 and every coefficient is
/// non-negative (and, with `require_k`, alpha and beta sum to less than one).
/// Throws NonNegativityViolation or StationarityViolation otherwise.
GarchParams validate(const GarchParams& params, bool require_k);

/// Same checks for the VTE parameterization; gamma2 must be positive and the
/// coefficients must lie in K.
VteParams validate(const VteParams& params);

/// Finite fourth moment test (alpha_1 + beta_1)^2 + (kurtosis - 1) alpha_1^2 < 1
/// for ARCH(1) and GARCH(1,1). `kurtosis` is E[Z^4] of the innovations.
bool fourth_moment_ok(const GarchParams& params, double kurtosis = 3.0);

/// Monte Carlo estimate of E[log(alpha_1 Z^2 + beta_1)] for standard Gaussian Z.
/// A negative value is sufficient for strict stationarity of ARCH(1) and
/// GARCH(1,1). With alpha_1 = 0 the result is log(beta_1) exactly.
double strict_stationarity_estimate(const GarchParams& params, std::size_t mc_draws,
                                    std::uint64_t seed);

struct SimOutput {
  std::vector<double> returns;
  std::vector<double> true_vol2;
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kDefaultBurnIn = 1000;

/// Simulates n observations of a Gaussian GARCH(p,q) path after discarding
/// `burn_in` steps. The recursion starts at the unconditional variance.
/// Deterministic for a given seed. Requires params in K.
SimOutput simulate(const GarchParams& params, std::size_t n, std::size_t burn_in,
                   std::uint64_t seed);

/// Random parameter draw used by the Monte Carlo protocol: omega = U * 10^-tau
/// with U ~ Uniform(0,1] and tau uniform on {1,...,8}; alpha and beta are
/// Uniform(0,1) coordinates rejection-sampled until their sum is below one.
GarchParams random_params(ModelOrder order, std::uint64_t seed);

}  // namespace adavol
