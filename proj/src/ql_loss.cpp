#include "adavol/ql_loss.hpp"

#include <cmath>
#include <string>

#include "adavol/errors.hpp"

namespace adavol {

namespace {

void require_positive(double v) {
  if (!(v > 0.0)) throw NonPositiveVariance("variance " + std::to_string(v) + " is not positive");
}

template <typename Params>
BatchLoss batch_loss_impl(std::span<const double> series, const Params& params,
                          VolFilter filter) {
  if (series.empty()) throw EmptySeries("batch loss needs at least one observation");
  BatchLoss out;
  out.grad.assign(filter.dim(), 0.0);
  for (const double x : series) {
    const double v = filter.predict(params);
    out.value += 0.5 * (x * x / v + std::log(v));
    const double scale = (v - x * x) / (2.0 * v * v);
    const auto dv = filter.gradient();
    for (std::size_t k = 0; k < dv.size(); ++k) out.grad[k] += scale * dv[k];
    filter.observe(x);
  }
  return out;
}

template <typename Params>
double batch_value_impl(std::span<const double> series, const Params& params,
                        std::size_t p, std::size_t q, bool vte, double presample) {
  if (series.empty()) throw EmptySeries("batch loss needs at least one observation");
  // Plain recursion without derivative bookkeeping; mirrors VolFilter::predict.
  const double gamma2 = vte ? std::max(params.gamma2_value(), kVarianceFloor) : 0.0;
  const double center = vte ? gamma2 : 0.0;
  const double fill = vte ? 0.0 : presample;
  std::vector<double> x2(p, 0.0);
  std::vector<double> v2(q, 0.0);
  std::size_t nx = 0;
  std::size_t nv = 0;
  double total = 0.0;
  for (const double x : series) {
    double v = vte ? gamma2 : params.intercept();
    for (std::size_t i = 0; i < p; ++i) v += params.a(i) * (i < nx ? x2[i] - center : fill);
    for (std::size_t j = 0; j < q; ++j) v += params.b(j) * (j < nv ? v2[j] - center : fill);
    if (!std::isfinite(v)) throw NonPositiveVariance("conditional variance is not finite");
    v = std::max(v, kVarianceFloor);
    total += 0.5 * (x * x / v + std::log(v));
    if (p > 0) {
      for (std::size_t i = p - 1; i > 0; --i) x2[i] = x2[i - 1];
      x2[0] = x * x;
      nx = std::min(nx + 1, p);
    }
    if (q > 0) {
      for (std::size_t j = q - 1; j > 0; --j) v2[j] = v2[j - 1];
      v2[0] = v;
      nv = std::min(nv + 1, q);
    }
  }
  return total;
}

struct FullView {
  const GarchParams& params;
  double intercept() const { return params.omega; }
  double gamma2_value() const { return 0.0; }
  double a(std::size_t i) const { return params.alpha[i]; }
  double b(std::size_t j) const { return params.beta[j]; }
};

struct VteView {
  const VteParams& params;
  double intercept() const { return 0.0; }
  double gamma2_value() const { return params.gamma2; }
  double a(std::size_t i) const { return params.alpha[i]; }
  double b(std::size_t j) const { return params.beta[j]; }
};

template <typename Params>
Matrix batch_hessian_impl(std::span<const double> series, const Params& params,
                          VolFilter filter) {
  if (series.empty()) throw EmptySeries("batch Hessian needs at least one observation");
  Matrix total(filter.dim());
  for (const double x : series) {
    const double v = filter.predict(params);
    total += loss_hessian(x, v, filter.gradient(), filter.hessian());
    filter.observe(x);
  }
  return total;
}

template <typename Params>
std::vector<double> min_eig_impl(std::span<const double> series, const Params& params,
                                 std::size_t window, VolFilter filter) {
  if (window < filter.dim() || window == 0) {
    throw WindowTooSmall("window " + std::to_string(window) + " is smaller than dimension " +
                         std::to_string(filter.dim()));
  }
  std::vector<double> out;
  Matrix acc(filter.dim());
  std::size_t count = 0;
  for (const double x : series) {
    const double v = filter.predict(params);
    acc += loss_hessian(x, v, filter.gradient(), filter.hessian());
    filter.observe(x);
    if (++count == window) {
      acc *= 1.0 / static_cast<double>(window);
      out.push_back(symmetric_eigenvalues(acc).front());
      acc.fill(0.0);
      count = 0;
    }
  }
  return out;
}

}  // namespace

double loss(double x, double v) {
  require_positive(v);
  return 0.5 * (x * x / v + std::log(v));
}

std::vector<double> loss_gradient(double x, double v, std::span<const double> dv) {
  require_positive(v);
  const double scale = (v - x * x) / (2.0 * v * v);
  std::vector<double> g(dv.begin(), dv.end());
  for (auto& gi : g) gi *= scale;
  return g;
}

Matrix loss_hessian(double x, double v, std::span<const double> dv, const Matrix& d2v) {
  require_positive(v);
  const std::size_t d = dv.size();
  if (d2v.dim() != d) throw InvalidArgument("second-derivative dimension mismatch");
  const double outer = (2.0 * x * x - v) / (2.0 * v * v * v);
  const double inner = (v - x * x) / (2.0 * v * v);
  Matrix h(d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      const double value = dv[i] * dv[j] * outer + 0.5 * (d2v(i, j) + d2v(j, i)) * inner;
      h(i, j) = value;
      h(j, i) = value;
    }
  }
  return h;
}

LossEval evaluate_step(const VolFilter& filter, double x) {
  const double v = filter.variance();
  LossEval out;
  out.loss = loss(x, v);
  out.grad = loss_gradient(x, v, filter.gradient());
  if (filter.has_hessian()) out.hess = loss_hessian(x, v, filter.gradient(), filter.hessian());
  return out;
}

BatchLoss batch_loss(std::span<const double> series, const GarchParams& params,
                     double presample) {
  return batch_loss_impl(series, params,
                         VolFilter(params.order(), Parameterization::full, presample));
}

BatchLoss batch_loss(std::span<const double> series, const VteParams& params) {
  return batch_loss_impl(series, params, VolFilter(params.order(), Parameterization::vte));
}

double batch_loss_value(std::span<const double> series, const GarchParams& params,
                        double presample) {
  return batch_value_impl(series, FullView{params}, params.alpha.size(), params.beta.size(),
                          false, presample);
}

double batch_loss_value(std::span<const double> series, const VteParams& params) {
  return batch_value_impl(series, VteView{params}, params.alpha.size(), params.beta.size(),
                          true, 0.0);
}

Matrix batch_hessian(std::span<const double> series, const GarchParams& params,
                     double presample) {
  return batch_hessian_impl(series, params,
                            VolFilter(params.order(), Parameterization::full, presample, true));
}

Matrix batch_hessian(std::span<const double> series, const VteParams& params) {
  return batch_hessian_impl(series, params,
                            VolFilter(params.order(), Parameterization::vte, 0.0, true));
}

std::vector<double> min_hessian_eig(std::span<const double> series, const GarchParams& params,
                                    std::size_t window, double presample) {
  return min_eig_impl(series, params, window,
                      VolFilter(params.order(), Parameterization::full, presample, true));
}

std::vector<double> min_hessian_eig(std::span<const double> series, const VteParams& params,
                                    std::size_t window) {
  return min_eig_impl(series, params, window,
                      VolFilter(params.order(), Parameterization::vte, 0.0, true));
}

}  // namespace adavol
