#include "adavol/metrics.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include <json.hpp>

#include "adavol/errors.hpp"

namespace adavol {

namespace {

template <std::size_t N>
double horner(const double (&c)[N], double x) {
  double acc = c[N - 1];
  for (std::size_t i = N - 1; i-- > 0;) acc = acc * x + c[i];
  return acc;
}

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) {
    throw LengthMismatch("series lengths differ: " + std::to_string(a) + " vs " +
                         std::to_string(b));
  }
  if (a == 0) throw EmptySeries("metrics need at least one observation");
}

void check_truth(double sigma, std::size_t t) {
  if (!(sigma > 0.0)) {
    throw NonPositiveTruth("true volatility at index " + std::to_string(t) + " is not positive");
  }
}

}  // namespace

double norm_inv_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("norm_inv_cdf needs p in (0, 1)");

  static constexpr double a[] = {3.3871328727963666080e0, 1.3314166789178437745e+2,
                                 1.9715909503065514427e+3, 1.3731693765509461125e+4,
                                 4.5921953931549871457e+4, 6.7265770927008700853e+4,
                                 3.3430575583588128105e+4, 2.5090809287301226727e+3};
  static constexpr double b[] = {1.0, 4.2313330701600911252e+1, 6.8718700749205790830e+2,
                                 5.3941960214247511077e+3, 2.1213794301586595867e+4,
                                 3.9307895800092710610e+4, 2.8729085735721942674e+4,
                                 5.2264952788528545610e+3};
  static constexpr double c[] = {1.42343711074968357734e0, 4.63033784615654529590e0,
                                 5.76949722146069140550e0, 3.64784832476320460504e0,
                                 1.27045825245236838258e0, 2.41780725177450611770e-1,
                                 2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static constexpr double d[] = {1.0, 2.05319162663775882187e0, 1.67638483018380384940e0,
                                 6.89767334985100004550e-1, 1.48103976427480074590e-1,
                                 1.51986665636164571966e-2, 5.47593808499534494600e-4,
                                 1.05075007164441684324e-9};
  static constexpr double e[] = {6.65790464350110377720e0, 5.46378491116411436990e0,
                                 1.78482653991729133580e0, 2.96560571828504891230e-1,
                                 2.65321895265761230930e-2, 1.24266094738807843860e-3,
                                 2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static constexpr double f[] = {1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1,
                                 1.48753612908506148525e-2, 7.86869131145613259100e-4,
                                 1.84631831751005468180e-5, 1.42151175831644588870e-7,
                                 2.04426310338993978564e-15};

  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * horner(a, r) / horner(b, r);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = horner(c, r) / horner(d, r);
  } else {
    r -= 5.0;
    value = horner(e, r) / horner(f, r);
  }
  return q < 0.0 ? -value : value;
}

double mpe(std::span<const double> true_vol, std::span<const double> est_vol) {
  check_lengths(true_vol.size(), est_vol.size());
  double sum = 0.0;
  for (std::size_t t = 0; t < true_vol.size(); ++t) {
    check_truth(true_vol[t], t);
    sum += (true_vol[t] - est_vol[t]) / true_vol[t];
  }
  return sum / static_cast<double>(true_vol.size());
}

double mape(std::span<const double> true_vol, std::span<const double> est_vol) {
  check_lengths(true_vol.size(), est_vol.size());
  double sum = 0.0;
  for (std::size_t t = 0; t < true_vol.size(); ++t) {
    check_truth(true_vol[t], t);
    sum += std::abs(true_vol[t] - est_vol[t]) / true_vol[t];
  }
  return sum / static_cast<double>(true_vol.size());
}

double mae_var(std::span<const double> returns, std::span<const double> est_var) {
  check_lengths(returns.size(), est_var.size());
  double sum = 0.0;
  for (std::size_t t = 0; t < returns.size(); ++t) {
    sum += std::abs(returns[t] * returns[t] - est_var[t]);
  }
  return sum / static_cast<double>(returns.size());
}

double pinball(double x, double vol, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw AlphaOutOfRange("quantile level must lie in (0, 1)");
  if (!(vol > 0.0)) throw NonPositiveVariance("volatility must be positive");
  const double quantile = norm_inv_cdf(alpha) * vol;
  if (x > quantile) return alpha * (x - quantile);
  return (1.0 - alpha) * (quantile - x);
}

double qs_score(std::span<const double> returns, std::span<const double> est_vol,
                std::span<const double> alphas) {
  check_lengths(returns.size(), est_vol.size());
  if (alphas.empty()) throw AlphaOutOfRange("at least one quantile level is required");
  std::vector<double> z(alphas.size());
  for (std::size_t m = 0; m < alphas.size(); ++m) {
    if (!(alphas[m] > 0.0 && alphas[m] < 1.0)) {
      throw AlphaOutOfRange("quantile level must lie in (0, 1)");
    }
    z[m] = norm_inv_cdf(alphas[m]);
  }
  double total = 0.0;
  for (std::size_t t = 0; t < returns.size(); ++t) {
    const double vol = est_vol[t];
    if (!(vol > 0.0)) throw NonPositiveVariance("volatility must be positive");
    const double x = returns[t];
    for (std::size_t m = 0; m < alphas.size(); ++m) {
      const double q = z[m] * vol;
      total += x > q ? alphas[m] * (x - q) : (1.0 - alphas[m]) * (q - x);
    }
  }
  return total / static_cast<double>(returns.size());
}

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  grid.reserve(99);
  for (int m = 1; m <= 99; ++m) grid.push_back(m / 100.0);
  return grid;
}

std::string EvalReport::to_json() const {
  auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  nlohmann::json j = {{"n", n},        {"mpe", num(mpe)}, {"mape", num(mape)},
                      {"mae", num(mae)}, {"qs", num(qs)},   {"alphas", alphas}};
  return j.dump();
}

std::string EvalReport::csv_header() { return "n,mpe,mape,mae,qs"; }

std::string EvalReport::to_csv_row() const {
  std::ostringstream os;
  os.precision(17);
  auto put = [&](double v) {
    if (std::isfinite(v)) os << v;
  };
  os << n << ',';
  put(mpe);
  os << ',';
  put(mape);
  os << ',';
  put(mae);
  os << ',';
  put(qs);
  return os.str();
}

EvalReport evaluate(std::span<const double> returns, std::span<const double> est_var,
                    std::optional<std::span<const double>> true_var,
                    std::span<const double> alphas) {
  check_lengths(returns.size(), est_var.size());
  std::vector<double> est_vol(est_var.size());
  for (std::size_t t = 0; t < est_var.size(); ++t) {
    if (!(est_var[t] > 0.0)) throw NonPositiveVariance("forecast variance must be positive");
    est_vol[t] = std::sqrt(est_var[t]);
  }

  EvalReport report;
  report.n = returns.size();
  report.alphas.assign(alphas.begin(), alphas.end());
  report.mae = mae_var(returns, est_var);
  report.qs = qs_score(returns, est_vol, alphas);
  if (true_var) {
    check_lengths(true_var->size(), est_var.size());
    std::vector<double> true_vol(true_var->size());
    for (std::size_t t = 0; t < true_vol.size(); ++t) true_vol[t] = std::sqrt((*true_var)[t]);
    report.mpe = mpe(true_vol, est_vol);
    report.mape = mape(true_vol, est_vol);
  } else {
    report.mpe = std::numeric_limits<double>::quiet_NaN();
    report.mape = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

}  // namespace adavol
