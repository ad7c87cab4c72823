#include "adavol/garch.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "adavol/errors.hpp"
#include "rng.hpp"

namespace adavol {

namespace {

double sum_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

void check_coefficients(const std::vector<double>& coeffs, const char* name) {
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (!(coeffs[i] >= 0.0) || !std::isfinite(coeffs[i])) {
      throw NonNegativityViolation(std::string(name) + "[" + std::to_string(i) +
                                   "] = " + std::to_string(coeffs[i]) + " is negative");
    }
  }
}

void require_low_order(const GarchParams& params) {
  if (params.alpha.size() != 1 || params.beta.size() > 1) {
    throw UnsupportedOrder("only ARCH(1) and GARCH(1,1) are supported");
  }
}

}  // namespace

void ModelOrder::validate() const {
  if (p + q == 0) throw InvalidArgument("model order needs p + q >= 1");
}

double GarchParams::persistence() const noexcept { return sum_of(alpha) + sum_of(beta); }

double GarchParams::unconditional_variance() const noexcept {
  return omega / (1.0 - persistence());
}

std::vector<double> GarchParams::to_vector() const {
  std::vector<double> theta;
  theta.reserve(1 + alpha.size() + beta.size());
  theta.push_back(omega);
  theta.insert(theta.end(), alpha.begin(), alpha.end());
  theta.insert(theta.end(), beta.begin(), beta.end());
  return theta;
}

GarchParams GarchParams::from_vector(const std::vector<double>& theta, ModelOrder order) {
  if (theta.size() != order.full_dim()) {
    throw InvalidArgument("parameter vector has " + std::to_string(theta.size()) +
                          " entries, expected " + std::to_string(order.full_dim()));
  }
  GarchParams params;
  params.omega = theta[0];
  params.alpha.assign(theta.begin() + 1, theta.begin() + 1 + static_cast<long>(order.p));
  params.beta.assign(theta.begin() + 1 + static_cast<long>(order.p), theta.end());
  return params;
}

double VteParams::persistence() const noexcept { return sum_of(alpha) + sum_of(beta); }

GarchParams VteParams::to_full() const { return GarchParams{implied_omega(), alpha, beta}; }

std::vector<double> VteParams::coefficients() const {
  std::vector<double> theta(alpha);
  theta.insert(theta.end(), beta.begin(), beta.end());
  return theta;
}

VteParams VteParams::from_coefficients(const std::vector<double>& theta, ModelOrder order,
                                       double gamma2) {
  if (theta.size() != order.vte_dim()) {
    throw InvalidArgument("coefficient vector has " + std::to_string(theta.size()) +
                          " entries, expected " + std::to_string(order.vte_dim()));
  }
  VteParams params;
  params.alpha.assign(theta.begin(), theta.begin() + static_cast<long>(order.p));
  params.beta.assign(theta.begin() + static_cast<long>(order.p), theta.end());
  params.gamma2 = gamma2;
  return params;
}

GarchParams validate(const GarchParams& params, bool require_k) {
  params.order().validate();
  if (!(params.omega > 0.0) || !std::isfinite(params.omega)) {
    throw NonNegativityViolation("omega = " + std::to_string(params.omega) + " must be positive");
  }
  check_coefficients(params.alpha, "alpha");
  check_coefficients(params.beta, "beta");
  if (require_k && !(params.persistence() < 1.0)) {
    throw StationarityViolation("sum(alpha) + sum(beta) = " +
                                std::to_string(params.persistence()) + " must be below 1");
  }
  return params;
}

VteParams validate(const VteParams& params) {
  params.order().validate();
  if (!(params.gamma2 > 0.0) || !std::isfinite(params.gamma2)) {
    throw NonNegativityViolation("gamma2 = " + std::to_string(params.gamma2) +
                                 " must be positive");
  }
  check_coefficients(params.alpha, "alpha");
  check_coefficients(params.beta, "beta");
  if (!(params.persistence() < 1.0)) {
    throw StationarityViolation("sum(alpha) + sum(beta) = " +
                                std::to_string(params.persistence()) + " must be below 1");
  }
  return params;
}

bool fourth_moment_ok(const GarchParams& params, double kurtosis) {
  require_low_order(params);
  const double a = params.alpha[0];
  const double b = params.beta.empty() ? 0.0 : params.beta[0];
  return (a + b) * (a + b) + (kurtosis - 1.0) * a * a < 1.0;
}

double strict_stationarity_estimate(const GarchParams& params, std::size_t mc_draws,
                                    std::uint64_t seed) {
  require_low_order(params);
  if (mc_draws < 10000) throw InvalidArgument("strict stationarity estimate needs >= 1e4 draws");
  const double a = params.alpha[0];
  const double b = params.beta.empty() ? 0.0 : params.beta[0];
  if (a == 0.0) return std::log(b);

  auto rng = detail::make_engine(seed);
  std::normal_distribution<double> normal;
  // Kahan summation keeps 1e6+ draws accurate.
  double sum = 0.0;
  double carry = 0.0;
  for (std::size_t i = 0; i < mc_draws; ++i) {
    const double z = normal(rng);
    const double term = std::log(a * z * z + b) - carry;
    const double next = sum + term;
    carry = (next - sum) - term;
    sum = next;
  }
  return sum / static_cast<double>(mc_draws);
}

SimOutput simulate(const GarchParams& params, std::size_t n, std::size_t burn_in,
                   std::uint64_t seed) {
  validate(params, true);
  if (n == 0) throw InvalidArgument("simulation length must be at least 1");

  const std::size_t p = params.alpha.size();
  const std::size_t q = params.beta.size();
  const double start = params.unconditional_variance();

  // Pre-sample squared returns and variances sit at the unconditional level.
  std::vector<double> x2_lags(p, start);
  std::vector<double> v_lags(q, start);

  auto rng = detail::make_engine(seed);
  std::normal_distribution<double> normal;

  SimOutput out;
  out.seed = seed;
  out.returns.reserve(n);
  out.true_vol2.reserve(n);

  const std::size_t total = burn_in + n;
  for (std::size_t t = 0; t < total; ++t) {
    double v = params.omega;
    if (t == 0) {
      v = start;
    } else {
      for (std::size_t i = 0; i < p; ++i) v += params.alpha[i] * x2_lags[i];
      for (std::size_t j = 0; j < q; ++j) v += params.beta[j] * v_lags[j];
    }
    const double x = std::sqrt(v) * normal(rng);

    if (p > 0) {
      std::copy_backward(x2_lags.begin(), x2_lags.end() - 1, x2_lags.end());
      x2_lags[0] = x * x;
    }
    if (q > 0) {
      std::copy_backward(v_lags.begin(), v_lags.end() - 1, v_lags.end());
      v_lags[0] = v;
    }
    if (t >= burn_in) {
      out.returns.push_back(x);
      out.true_vol2.push_back(v);
    }
  }
  return out;
}

GarchParams random_params(ModelOrder order, std::uint64_t seed) {
  order.validate();
  auto rng = detail::make_engine(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> tau_dist(1, 8);

  GarchParams params;
  const double u = 1.0 - unit(rng);  // (0, 1]
  params.omega = u * std::pow(10.0, -tau_dist(rng));

  params.alpha.resize(order.p);
  params.beta.resize(order.q);
  for (;;) {
    double total = 0.0;
    for (auto& a : params.alpha) total += (a = unit(rng));
    for (auto& b : params.beta) total += (b = unit(rng));
    if (total < 1.0) break;
  }
  return params;
}

}  // namespace adavol
