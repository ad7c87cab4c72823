#include "adavol/adavol.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "adavol/errors.hpp"

namespace adavol {

std::vector<double> project_capped_simplex(std::span<const double> v, double cap) {
  if (!(cap > 0.0)) throw InvalidArgument("projection cap must be positive");
  std::vector<double> x(v.size());
  double clipped_sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    x[i] = std::max(v[i], 0.0);
    clipped_sum += x[i];
  }
  if (clipped_sum <= cap) return x;

  // Sort-and-threshold projection onto {x >= 0, sum(x) = cap}.
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  // The largest entry always stays in the support. Entries are shifted as
  // (v - mean of support) + cap / k rather than v - tau, which cancels
  // catastrophically for huge inputs.
  double prefix = u[0];
  double support_sum = u[0];
  std::size_t k = 1;
  for (std::size_t j = 1; j < u.size(); ++j) {
    prefix += u[j];
    const double candidate = (prefix - cap) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0.0) {
      support_sum = prefix;
      k = j + 1;
    }
  }
  const double kd = static_cast<double>(k);
  const double support_mean = support_sum / kd;
  for (std::size_t i = 0; i < v.size(); ++i) x[i] = std::max((v[i] - support_mean) + cap / kd, 0.0);
  return x;
}

void AdaVolConfig::validate() const {
  if (order.p + order.q == 0) throw InvalidConfig("model order needs p + q >= 1");
  if (!(eta > 0.0)) throw InvalidConfig("eta must be positive");
  if (!(eps > 0.0)) throw InvalidConfig("eps must be positive");
  if (!(margin > 0.0 && margin < 1.0)) throw InvalidConfig("margin must lie in (0, 1)");
  if (minibatch == 0) throw InvalidConfig("minibatch must be at least 1");
  if (early_stop && (early_stop->window == 0 || !(early_stop->tol > 0.0))) {
    throw InvalidConfig("early stop needs a positive window and tolerance");
  }
}

void StreamingMoments::update(double x) {
  ++count_;
  const double t = static_cast<double>(count_);
  if (mode_ == MeanRecursion::standard) {
    const double delta = x - mean_;
    mean_ += delta / t;
    m2_ += delta * (x - mean_);
  } else {
    mean_ = t / (t + 1.0) * mean_ + x / (t + 1.0);
    const double dev = x - mean_;
    variance_ = (t - 1.0) / t * variance_ + dev * dev / t;
  }
}

double StreamingMoments::variance() const noexcept {
  if (count_ == 0) return 0.0;
  if (mode_ == MeanRecursion::standard) return m2_ / static_cast<double>(count_);
  return variance_;
}

AdaVolEstimator::AdaVolEstimator(std::span<const double> theta0, const AdaVolConfig& config)
    : config_(config),
      moments_(config.mean_recursion),
      filter_(config.order, Parameterization::vte) {
  config_.validate();
  const std::size_t d = config_.order.vte_dim();
  if (theta0.size() != d) {
    throw InvalidConfig("theta0 has " + std::to_string(theta0.size()) + " entries, expected " +
                        std::to_string(d));
  }
  for (const double v : theta0) {
    if (!std::isfinite(v)) throw InvalidConfig("theta0 must be finite");
  }
  theta_ = project_capped_simplex(theta0, 1.0 - config_.margin);
  accum_g2_.assign(d, config_.eps);
  grad_sum_.assign(d, 0.0);
  last_gradient_.assign(d, 0.0);
  step_buffer_.assign(d, 0.0);
  params_ = VteParams::from_coefficients(theta_, config_.order, kVarianceFloor);
  if (config_.early_stop) {
    history_.assign(config_.early_stop->window + 1, theta_);
  }
}

double AdaVolEstimator::implied_omega() const noexcept {
  const double total = std::accumulate(theta_.begin(), theta_.end(), 0.0);
  return moments_.variance() * (1.0 - total);
}

VteParams AdaVolEstimator::params() const {
  return VteParams::from_coefficients(theta_, config_.order, moments_.variance());
}

double AdaVolEstimator::update(double x) {
  if (!std::isfinite(x)) throw NonFiniteInput("observation is not finite");
  ++t_;
  moments_.update(x);
  const double gamma2 = std::max(moments_.variance(), kVarianceFloor);

  if (t_ == 1) filter_.prime(x * x);

  if (!frozen_) {
    // g_t = grad sigma2_t * (sigma2_t - X_t^2) / (2 sigma2_t^2) at theta_{t-1}.
    const double v = filter_.variance();
    const double scale = (v - x * x) / (2.0 * v * v);
    const auto dv = filter_.gradient();
    for (std::size_t k = 0; k < grad_sum_.size(); ++k) grad_sum_[k] += scale * dv[k];
    if (++batch_count_ == config_.minibatch) {
      const double inv = 1.0 / static_cast<double>(batch_count_);
      for (auto& g : grad_sum_) g *= inv;
      adagrad_step(grad_sum_);
      std::fill(grad_sum_.begin(), grad_sum_.end(), 0.0);
      batch_count_ = 0;
      if (config_.early_stop) check_early_stop();
    }
  }

  filter_.observe(x);
  std::copy(theta_.begin(), theta_.begin() + static_cast<long>(config_.order.p),
            params_.alpha.begin());
  std::copy(theta_.begin() + static_cast<long>(config_.order.p), theta_.end(),
            params_.beta.begin());
  params_.gamma2 = gamma2;
  pred_vol2_ = filter_.predict(params_);
  return pred_vol2_;
}

void AdaVolEstimator::adagrad_step(std::span<const double> grad) {
  for (std::size_t k = 0; k < theta_.size(); ++k) {
    accum_g2_[k] += grad[k] * grad[k];
    step_buffer_[k] = theta_[k] - config_.eta * grad[k] / std::sqrt(accum_g2_[k]);
    last_gradient_[k] = grad[k];
  }
  theta_ = project_capped_simplex(step_buffer_, 1.0 - config_.margin);
}

void AdaVolEstimator::check_early_stop() {
  const std::size_t slots = history_.size();
  // Slot at history_head_ holds the oldest theta, `window` steps back.
  double worst = 0.0;
  const auto& old = history_[history_head_];
  for (std::size_t k = 0; k < theta_.size(); ++k) worst = std::max(worst, std::abs(theta_[k] - old[k]));
  history_[history_head_] = theta_;
  history_head_ = (history_head_ + 1) % slots;
  // Only trust the comparison once the ring has been filled with real steps.
  if (t_ / config_.minibatch >= slots && worst < config_.early_stop->tol) frozen_ = true;
}

StreamResult run_stream(std::span<const double> series, std::span<const double> theta0,
                        const AdaVolConfig& config) {
  if (series.empty()) throw EmptySeries("streaming estimation needs at least one observation");
  AdaVolEstimator est(theta0, config);
  const std::size_t n = series.size();
  const std::size_t d = config.order.vte_dim();

  Trajectory traj;
  traj.dim = d;
  traj.theta.reserve(n * d);
  traj.gamma2.reserve(n);
  traj.next_variance.reserve(n);
  std::vector<double> predicted;
  predicted.reserve(n);

  for (const double x : series) {
    // sigma2_t was produced by the previous update (or is X_1^2 at t = 1).
    predicted.push_back(est.t() == 0 ? std::max(x * x, kVarianceFloor) : est.predicted_variance());
    est.update(x);
    const auto th = est.theta();
    traj.theta.insert(traj.theta.end(), th.begin(), th.end());
    traj.gamma2.push_back(est.gamma2());
    traj.next_variance.push_back(est.predicted_variance());
  }
  return StreamResult{std::move(traj), std::move(predicted), std::move(est)};
}

}  // namespace adavol
