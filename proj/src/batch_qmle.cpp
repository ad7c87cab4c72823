#include "adavol/batch_qmle.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <string>

#include "adavol/adavol.hpp"
#include "adavol/errors.hpp"
#include "adavol/ql_loss.hpp"

namespace adavol {

namespace {

constexpr double kStepMin = 1e-30;
constexpr double kStepMax = 1e30;
constexpr double kArmijo = 1e-4;

double sample_variance(std::span<const double> series) {
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t k = 0;
  for (const double x : series) {
    ++k;
    const double delta = x - mean;
    mean += delta / static_cast<double>(k);
    m2 += delta * (x - mean);
  }
  return std::max(m2 / static_cast<double>(k), kVarianceFloor);
}

/// Mean loss and gradient at theta for either parameterization.
class Objective {
 public:
  Objective(std::span<const double> series, ModelOrder order, Parameterization mode,
            double gamma2)
      : series_(series), order_(order), mode_(mode), gamma2_(gamma2),
        scale_(1.0 / static_cast<double>(series.size())) {}

  double value(const std::vector<double>& theta) {
    ++evaluations;
    double v;
    try {
      if (mode_ == Parameterization::full) {
        v = batch_loss_value(series_, GarchParams::from_vector(theta, order_));
      } else {
        v = batch_loss_value(series_, VteParams::from_coefficients(theta, order_, gamma2_));
      }
    } catch (const NonPositiveVariance&) {
      // Overflowing trial points are rejected by the line search.
      return std::numeric_limits<double>::infinity();
    }
    v *= scale_;
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  }

  double value_and_gradient(const std::vector<double>& theta, std::vector<double>& grad) {
    ++evaluations;
    BatchLoss b = mode_ == Parameterization::full
                      ? batch_loss(series_, GarchParams::from_vector(theta, order_))
                      : batch_loss(series_, VteParams::from_coefficients(theta, order_, gamma2_));
    grad = std::move(b.grad);
    for (auto& g : grad) g *= scale_;
    const double v = b.value * scale_;
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  }

  std::size_t evaluations = 0;

 private:
  std::span<const double> series_;
  ModelOrder order_;
  Parameterization mode_;
  double gamma2_;
  double scale_;
};

}  // namespace

GarchParams FitResult::params() const {
  if (mode == Parameterization::full) return GarchParams::from_vector(theta, order);
  return VteParams::from_coefficients(theta, order, gamma2).to_full();
}

std::vector<double> project_feasible(std::span<const double> theta, ModelOrder order,
                                     Parameterization mode, const FitOptions& options) {
  const double cap = 1.0 - options.margin;
  if (mode == Parameterization::vte) return project_capped_simplex(theta, cap);
  std::vector<double> out(theta.size());
  out[0] = std::max(theta[0], options.omega_floor);
  const auto coeffs = project_capped_simplex(theta.subspan(1), cap);
  std::copy(coeffs.begin(), coeffs.end(), out.begin() + 1);
  (void)order;
  return out;
}

FitResult fit(std::span<const double> series, std::span<const double> theta0, ModelOrder order,
              Parameterization mode, const FitOptions& options) {
  order.validate();
  const std::size_t d = mode == Parameterization::full ? order.full_dim() : order.vte_dim();
  if (theta0.size() != d) {
    throw InvalidArgument("start vector has " + std::to_string(theta0.size()) +
                          " entries, expected " + std::to_string(d));
  }
  if (series.size() < 10 * d) {
    throw InvalidArgument("batch fit needs at least " + std::to_string(10 * d) +
                          " observations, got " + std::to_string(series.size()));
  }

  FitResult result;
  result.mode = mode;
  result.order = order;
  result.gamma2 = mode == Parameterization::vte ? sample_variance(series) : 0.0;

  // The search runs in scaled coordinates u = theta / scale, with omega
  // measured in units of the sample variance so that all coordinates have
  // comparable curvature.
  std::vector<double> scale(d, 1.0);
  if (mode == Parameterization::full) scale[0] = sample_variance(series);
  FitOptions scaled_options = options;
  scaled_options.omega_floor = options.omega_floor / scale[0];

  Objective raw(series, order, mode, result.gamma2);
  std::vector<double> theta_buf(d);
  auto to_theta = [&](const std::vector<double>& u) {
    for (std::size_t i = 0; i < d; ++i) theta_buf[i] = u[i] * scale[i];
    return theta_buf;
  };
  struct {
    Objective* raw;
    std::function<std::vector<double>(const std::vector<double>&)> to_theta;
    const std::vector<double>* scale;
    std::size_t evaluations() const { return raw->evaluations; }
    double value(const std::vector<double>& u) { return raw->value(to_theta(u)); }
    double value_and_gradient(const std::vector<double>& u, std::vector<double>& grad) {
      const double v = raw->value_and_gradient(to_theta(u), grad);
      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= (*scale)[i];
      return v;
    }
  } objective{&raw, to_theta, &scale};
  auto project = [&](const std::vector<double>& v) {
    return project_feasible(v, order, mode, scaled_options);
  };

  std::vector<double> x(d);
  for (std::size_t i = 0; i < d; ++i) x[i] = theta0[i] / scale[i];
  x = project(x);
  std::vector<double> g;
  double f = objective.value_and_gradient(x, g);
  result.start_objective = f;

  std::vector<double> best_x = x;
  double best_f = f;

  std::deque<double> recent{f};
  std::vector<double> trial(d);
  std::vector<double> direction(d);
  std::vector<double> g_new;

  // Projected-gradient step length. Omega is measured on a log scale above
  // one sample variance: far above the optimum the loss is nearly flat in
  // omega itself and the raw step would look stationary.
  auto pg_norm = [&](const std::vector<double>& at, const std::vector<double>& grad) {
    for (std::size_t i = 0; i < d; ++i) trial[i] = at[i] - grad[i];
    const auto target = project(trial);
    double worst = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      double step = std::abs(target[i] - at[i]);
      if (i == 0 && mode == Parameterization::full) step *= std::max(1.0, at[0]);
      worst = std::max(worst, step);
    }
    return worst;
  };

  double pg = pg_norm(x, g);
  double lambda = pg > 0.0 ? std::clamp(1.0 / pg, kStepMin, kStepMax) : 1.0;
  std::size_t iter = 0;

  while (iter < options.max_iters && pg > options.tol && std::isfinite(f)) {
    ++iter;
    for (std::size_t i = 0; i < d; ++i) trial[i] = x[i] - lambda * g[i];
    const auto target = project(trial);
    double slope = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      direction[i] = target[i] - x[i];
      slope += g[i] * direction[i];
    }
    if (!(slope < 0.0)) break;  // no descent left at machine precision

    const double f_ref = *std::max_element(recent.begin(), recent.end());
    double step = 1.0;
    double f_trial = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < d; ++i) trial[i] = x[i] + step * direction[i];
      f_trial = objective.value(trial);
      if (f_trial <= f_ref + kArmijo * step * slope) {
        accepted = true;
        break;
      }
      // Safeguarded quadratic interpolation.
      double next = 0.5 * step;
      if (std::isfinite(f_trial)) {
        const double denom = f_trial - f - step * slope;
        if (denom > 0.0) {
          const double q = -0.5 * step * step * slope / denom;
          if (q >= 0.1 * step && q <= 0.9 * step) next = q;
        }
      }
      step = next;
    }
    if (!accepted) break;

    std::vector<double> x_new = trial;
    const double f_new = objective.value_and_gradient(x_new, g_new);
    double ss = 0.0;
    double sy = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double s = x_new[i] - x[i];
      const double y = g_new[i] - g[i];
      ss += s * s;
      sy += s * y;
    }
    lambda = sy > 0.0 ? std::clamp(ss / sy, kStepMin, kStepMax) : kStepMax;

    x = std::move(x_new);
    g.swap(g_new);
    f = f_new;
    if (f < best_f) {
      best_f = f;
      best_x = x;
    }
    recent.push_back(f);
    if (recent.size() > options.memory) recent.pop_front();
    pg = pg_norm(x, g);
    if (pg <= options.tol && f > best_f) {
      // The non-monotone search can land on a worse stationary point (e.g. a
      // face where beta has no effect because alpha = 0). Resume from the best.
      x = best_x;
      f = objective.value_and_gradient(x, g);
      recent.assign(1, f);
      pg = pg_norm(x, g);
      lambda = pg > 0.0 ? std::clamp(1.0 / pg, kStepMin, kStepMax) : 1.0;
    }
  }

  if (best_x != x) {
    std::vector<double> best_g;
    objective.value_and_gradient(best_x, best_g);
    pg = pg_norm(best_x, best_g);
  }
  result.theta = to_theta(best_x);
  if (mode == Parameterization::full) result.theta[0] = std::max(result.theta[0], options.omega_floor);
  result.objective = best_f;
  result.pg_norm = pg;
  result.iterations = iter;
  result.evaluations = objective.evaluations();
  result.converged = pg <= options.tol;
  return result;
}

std::vector<double> filtered_variance(std::span<const double> series, const FitResult& fit) {
  std::vector<double> out;
  out.reserve(series.size());
  if (fit.mode == Parameterization::full) {
    const auto params = GarchParams::from_vector(fit.theta, fit.order);
    VolFilter filter(fit.order, Parameterization::full);
    for (const double x : series) {
      out.push_back(filter.predict(params));
      filter.observe(x);
    }
  } else {
    const auto params = VteParams::from_coefficients(fit.theta, fit.order, fit.gamma2);
    VolFilter filter(fit.order, Parameterization::vte);
    for (const double x : series) {
      out.push_back(filter.predict(params));
      filter.observe(x);
    }
  }
  return out;
}

RollingResult rolling_refit(std::span<const double> series, std::span<const double> theta0,
                            ModelOrder order, const RefitSchedule& schedule,
                            Parameterization mode, const FitOptions& options) {
  if (schedule.increment == 0) throw InvalidArgument("refit increment must be at least 1");
  if (series.empty()) throw EmptySeries("rolling refit needs observations");
  const std::size_t n = series.size();
  const std::size_t d = mode == Parameterization::full ? order.full_dim() : order.vte_dim();

  std::vector<std::size_t> ends;
  for (std::size_t k = schedule.increment; k <= n; k += schedule.increment) ends.push_back(k);
  if (ends.empty() || ends.back() != n) ends.push_back(n);

  RollingResult out;
  out.dim = d;
  out.theta.resize(n * d);
  out.variance.resize(n);
  out.fit_ends = ends;

  std::vector<double> start(theta0.begin(), theta0.end());
  std::size_t block_begin = 0;
  for (const std::size_t end : ends) {
    const auto prefix = series.first(end);
    FitResult result = fit(prefix, start, order, mode, options);
    out.total_iterations += result.iterations;
    if (!result.converged) ++out.nonconverged;

    const auto var = filtered_variance(prefix, result);
    for (std::size_t t = block_begin; t < end; ++t) {
      std::copy(result.theta.begin(), result.theta.end(), out.theta.begin() + static_cast<long>(t * d));
      out.variance[t] = var[t];
    }
    if (schedule.warm_start) start = result.theta;
    out.fits.push_back(std::move(result));
    block_begin = end;
  }
  return out;
}

}  // namespace adavol
