#include "adavol/vol_filter.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "adavol/errors.hpp"

namespace adavol {

VolFilter::VolFilter(ModelOrder order, Parameterization mode, double presample,
                     bool with_hessian)
    : order_(order),
      mode_(mode),
      dim_(mode == Parameterization::full ? order.full_dim() : order.vte_dim()),
      presample_(presample),
      with_hessian_(with_hessian),
      lag_x2_(order.p, 0.0),
      lag_v_(order.q, 0.0),
      lag_dv_(order.q * dim_, 0.0),
      gradient_(dim_, 0.0) {
  order.validate();
  if (with_hessian_) {
    lag_d2v_.assign(order.q, Matrix(dim_));
    hessian_ = Matrix(dim_);
  }
}

double VolFilter::predict(const GarchParams& params) {
  if (mode_ != Parameterization::full) {
    throw ModeMismatch("full-parameter prediction on a VTE filter");
  }
  if (params.order() != order_) throw ModeMismatch("parameter order differs from filter order");
  return predict_impl(params.alpha, params.beta, params.omega, 0.0);
}

double VolFilter::predict(const VteParams& params) {
  if (mode_ != Parameterization::vte) {
    throw ModeMismatch("VTE prediction on a full-parameter filter");
  }
  if (params.order() != order_) throw ModeMismatch("parameter order differs from filter order");
  return predict_impl(params.alpha, params.beta, 0.0, std::max(params.gamma2, kVarianceFloor));
}

template <typename Coeffs>
double VolFilter::predict_impl(const Coeffs& alpha, const Coeffs& beta, double omega,
                               double gamma2) {
  const std::size_t p = order_.p;
  const std::size_t q = order_.q;
  const bool vte = mode_ == Parameterization::vte;
  // Offset of the first alpha / beta component in the gradient vector.
  const std::size_t a0 = vte ? 0 : 1;
  const std::size_t b0 = a0 + p;

  double v = vte ? gamma2 : omega;
  if (!vte) gradient_[0] = 1.0;

  for (std::size_t i = 0; i < p; ++i) {
    double term;
    if (i < x_filled_) {
      term = lag_x2_[x_slot(i)] - (vte ? gamma2 : 0.0);
    } else {
      term = vte ? 0.0 : presample_;
    }
    v += alpha[i] * term;
    gradient_[a0 + i] = term;
  }
  for (std::size_t j = 0; j < q; ++j) {
    double term;
    if (j < v_filled_) {
      term = lag_v_[v_slot(j)] - (vte ? gamma2 : 0.0);
    } else {
      term = vte ? 0.0 : presample_;
    }
    v += beta[j] * term;
    gradient_[b0 + j] = term;
  }
  for (std::size_t j = 0; j < q && j < v_filled_; ++j) {
    const double* dv = &lag_dv_[v_slot(j) * dim_];
    for (std::size_t k = 0; k < dim_; ++k) gradient_[k] += beta[j] * dv[k];
  }

  if (with_hessian_) {
    // d2 sigma2_t = sum_j (e_bj dv_{t-j}^T + dv_{t-j} e_bj^T) + sum_j beta_j d2 sigma2_{t-j}
    hessian_.fill(0.0);
    for (std::size_t j = 0; j < q && j < v_filled_; ++j) {
      const std::size_t slot = v_slot(j);
      const double* dv = &lag_dv_[slot * dim_];
      const std::size_t bj = b0 + j;
      for (std::size_t k = 0; k < dim_; ++k) {
        hessian_(bj, k) += dv[k];
        hessian_(k, bj) += dv[k];
      }
      const Matrix& prev = lag_d2v_[slot];
      for (std::size_t r = 0; r < dim_; ++r)
        for (std::size_t c = 0; c < dim_; ++c) hessian_(r, c) += beta[j] * prev(r, c);
    }
  }

  if (!std::isfinite(v)) throw NonPositiveVariance("conditional variance is not finite");
  variance_ = std::max(v, kVarianceFloor);
  pending_ = true;
  return variance_;
}

void VolFilter::prime(double variance) {
  if (!(variance >= 0.0) || !std::isfinite(variance)) {
    throw NonPositiveVariance("primed variance must be finite and non-negative");
  }
  variance_ = std::max(variance, kVarianceFloor);
  std::fill(gradient_.begin(), gradient_.end(), 0.0);
  if (with_hessian_) hessian_.fill(0.0);
  pending_ = true;
}

void VolFilter::observe(double x) {
  if (!pending_ && v_filled_ > 0) {
    throw InvalidArgument("observe called twice without a prediction in between");
  }
  if (order_.p > 0) {
    x_head_ = (x_head_ + order_.p - 1) % order_.p;
    lag_x2_[x_head_] = x * x;
    x_filled_ = std::min(x_filled_ + 1, order_.p);
  }
  if (order_.q > 0 && pending_) {
    v_head_ = (v_head_ + order_.q - 1) % order_.q;
    lag_v_[v_head_] = variance_;
    std::copy(gradient_.begin(), gradient_.end(),
              lag_dv_.begin() + static_cast<long>(v_head_ * dim_));
    if (with_hessian_) lag_d2v_[v_head_] = hessian_;
    v_filled_ = std::min(v_filled_ + 1, order_.q);
  }
  pending_ = false;
  ++steps_;
}

double VolFilter::variance_step_full(const GarchParams& params, double x_prev) {
  observe(x_prev);
  return predict(params);
}

double VolFilter::variance_step_vte(const VteParams& params, double x_prev) {
  observe(x_prev);
  return predict(params);
}

std::span<const double> VolFilter::gradient(Parameterization expected) const {
  if (expected != mode_) {
    throw ModeMismatch("gradient requested in a different parameterization than the filter's");
  }
  return gradient_;
}

const Matrix& VolFilter::hessian() const {
  if (!with_hessian_) throw InvalidArgument("filter was built without Hessian tracking");
  return hessian_;
}

}  // namespace adavol
