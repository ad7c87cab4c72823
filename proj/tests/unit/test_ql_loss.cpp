#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "adavol/errors.hpp"
#include "adavol/garch.hpp"
#include "adavol/ql_loss.hpp"
#include "oracles.hpp"

using namespace adavol;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<double> normal_stream(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z(0.0, scale);
  std::vector<double> x(n);
  for (auto& v : x) v = z(gen);
  return x;
}

std::vector<double> random_full_theta(std::mt19937_64& gen, ModelOrder order) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> theta{0.05 + u(gen)};
  const std::size_t k = order.p + order.q;
  std::vector<double> c(k);
  double total;
  do {
    total = 0.0;
    for (auto& v : c) {
      v = u(gen) / static_cast<double>(k);
      total += v;
    }
  } while (total >= 0.98);
  theta.insert(theta.end(), c.begin(), c.end());
  return theta;
}

}  // namespace

TEST_CASE("loss values", "[ql_loss]") {
  CHECK(loss(0.0, 1.0) == 0.0);
  CHECK(loss(1.0, 1.0) == 0.5);
  CHECK_THAT(loss(2.0, 2.0), WithinAbs(1.346573590279973, 1e-14));
  CHECK_THROWS_AS(loss(1.0, 0.0), NonPositiveVariance);
  CHECK_THROWS_AS(loss(1.0, -1.0), NonPositiveVariance);
}

TEST_CASE("loss gradient values", "[ql_loss]") {
  const std::vector<double> dv{1.0, 2.0};
  const auto zero = loss_gradient(std::sqrt(3.0), 3.0, dv);
  CHECK_THAT(zero[0], WithinAbs(0.0, 1e-15));
  CHECK_THAT(zero[1], WithinAbs(0.0, 1e-15));
  const auto g = loss_gradient(0.0, 1.0, dv);
  CHECK(g[0] == 0.5);
  CHECK(g[1] == 1.0);
  CHECK_THROWS_AS(loss_gradient(1.0, 0.0, dv), NonPositiveVariance);
}

TEST_CASE("loss Hessian special cases", "[ql_loss]") {
  const std::vector<double> dv{1.0, 3.0};
  const Matrix zero(2);
  const double v = 2.0;
  const auto h = loss_hessian(std::sqrt(v), v, dv, zero);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      CHECK_THAT(h(i, j), WithinRel(dv[i] * dv[j] / (2.0 * v * v), 1e-14));
  CHECK(symmetric_eigenvalues(h).front() >= -1e-15);

  const auto z = loss_hessian(1.0, 1.0, std::vector<double>{0.0, 0.0}, zero);
  CHECK(symmetric_eigenvalues(z).front() == 0.0);
  CHECK_THROWS_AS(loss_hessian(1.0, 1.0, dv, Matrix(3)), InvalidArgument);
}

TEST_CASE("batch loss of the constant model", "[ql_loss]") {
  std::vector<double> x(101);
  for (std::size_t t = 0; t < x.size(); ++t) x[t] = t % 2 ? 1.0 : -1.0;
  const GarchParams params{1.0, {0.0}, {0.0}};
  CHECK_THAT(batch_loss(x, params).value, WithinAbs(50.5, 1e-12));
  CHECK_THAT(batch_loss_value(x, params), WithinAbs(50.5, 1e-12));
  CHECK_THROWS_AS(batch_loss(std::vector<double>{}, params), EmptySeries);

  const std::vector<double> one{0.3};
  CHECK(std::isfinite(batch_loss(one, GarchParams{0.5, {0.2}, {0.3}}).value));
}

TEST_CASE("batch loss matches independent oracles", "[ql_loss]") {
  std::mt19937_64 gen(8);
  for (const ModelOrder order : {ModelOrder{1, 0}, ModelOrder{1, 1}, ModelOrder{2, 2}}) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto theta = random_full_theta(gen, order);
      const auto x = normal_stream(200, static_cast<std::uint64_t>(trial) + 40);
      const auto params = GarchParams::from_vector(theta, order);
      const double expected = oracle::loss_full(x, theta, order.p, order.q, 0.2);
      CHECK_THAT(batch_loss(x, params, 0.2).value, WithinRel(expected, 1e-12));
      CHECK_THAT(batch_loss_value(x, params, 0.2), WithinRel(expected, 1e-12));

      std::vector<double> coeffs(theta.begin() + 1, theta.end());
      const auto vte = VteParams::from_coefficients(coeffs, order, 0.8);
      const double expected_vte = oracle::loss_vte(x, coeffs, order.p, order.q, 0.8);
      CHECK_THAT(batch_loss(x, vte).value, WithinRel(expected_vte, 1e-12));
      CHECK_THAT(batch_loss_value(x, vte), WithinRel(expected_vte, 1e-12));
    }
  }
}

TEST_CASE("batch gradient is the sum of step gradients", "[ql_loss]") {
  const auto x = normal_stream(300, 12);
  const GarchParams params{0.3, {0.15}, {0.6}};
  VolFilter f({1, 1}, Parameterization::full);
  std::vector<double> total(3, 0.0);
  for (const double xt : x) {
    f.predict(params);
    const auto step = evaluate_step(f, xt);
    for (std::size_t k = 0; k < 3; ++k) total[k] += step.grad[k];
    f.observe(xt);
  }
  const auto batch = batch_loss(x, params);
  for (std::size_t k = 0; k < 3; ++k) CHECK_THAT(batch.grad[k], WithinRel(total[k], 1e-10));
}

TEST_CASE("batch gradient matches central finite differences", "[ql_loss]") {
  std::mt19937_64 gen(31);
  const double h = 1e-6;
  for (const ModelOrder order : {ModelOrder{1, 0}, ModelOrder{1, 1}, ModelOrder{2, 1}}) {
    for (int trial = 0; trial < 30; ++trial) {
      const auto theta = random_full_theta(gen, order);
      const auto x = normal_stream(50, static_cast<std::uint64_t>(trial) + 900);
      const auto g = batch_loss(x, GarchParams::from_vector(theta, order)).grad;
      for (std::size_t k = 0; k < theta.size(); ++k) {
        auto up = theta;
        auto dn = theta;
        up[k] += h;
        dn[k] -= h;
        const double fd = (oracle::loss_full(x, up, order.p, order.q) -
                           oracle::loss_full(x, dn, order.p, order.q)) / (2.0 * h);
        REQUIRE_THAT(g[k], WithinRel(fd, 1e-5) || WithinAbs(fd, 1e-7));
      }
    }
  }
}

TEST_CASE("batch Hessian matches finite differences of the gradient", "[ql_loss]") {
  std::mt19937_64 gen(32);
  const double h = 1e-6;
  for (const ModelOrder order : {ModelOrder{1, 0}, ModelOrder{1, 1}, ModelOrder{2, 1}, ModelOrder{1, 2}}) {
    for (int trial = 0; trial < 25; ++trial) {
      const auto theta = random_full_theta(gen, order);
      const auto x = normal_stream(60, static_cast<std::uint64_t>(trial) + 300);
      const auto hess = batch_hessian(x, GarchParams::from_vector(theta, order));
      CHECK(hess.asymmetry() <= 1e-12);
      const std::size_t d = theta.size();
      double scale = 0.0;
      for (const double v : hess.data()) scale = std::max(scale, std::abs(v));
      for (std::size_t k = 0; k < d; ++k) {
        auto up = theta;
        auto dn = theta;
        up[k] += h;
        dn[k] -= h;
        const auto gu = batch_loss(x, GarchParams::from_vector(up, order)).grad;
        const auto gd = batch_loss(x, GarchParams::from_vector(dn, order)).grad;
        for (std::size_t i = 0; i < d; ++i) {
          const double fd = (gu[i] - gd[i]) / (2.0 * h);
          REQUIRE_THAT(hess(i, k), WithinRel(fd, 1e-4) || WithinAbs(fd, 1e-4 * scale));
        }
      }
    }
  }
}

TEST_CASE("VTE Hessian matches finite differences", "[ql_loss]") {
  const auto x = normal_stream(80, 17, 0.7);
  const std::vector<double> coeffs{0.1, 0.6};
  const double g2 = 0.5;
  const auto hess = batch_hessian(x, VteParams::from_coefficients(coeffs, {1, 1}, g2));
  const double h = 1e-6;
  for (std::size_t k = 0; k < 2; ++k) {
    auto up = coeffs;
    auto dn = coeffs;
    up[k] += h;
    dn[k] -= h;
    const auto gu = batch_loss(x, VteParams::from_coefficients(up, {1, 1}, g2)).grad;
    const auto gd = batch_loss(x, VteParams::from_coefficients(dn, {1, 1}, g2)).grad;
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK_THAT(hess(i, k), WithinRel((gu[i] - gd[i]) / (2.0 * h), 1e-4));
    }
  }
}

TEST_CASE("ARCH(1) step Hessian eigenvalues have a closed form", "[ql_loss]") {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const double omega = 0.1 + 2.0 * u(gen);
    const double alpha = u(gen);
    const double x_prev = 2.0 * z(gen);
    const double x = 2.0 * z(gen);
    VolFilter f({1, 0}, Parameterization::full, 0.0, true);
    f.observe(x_prev);
    const double v = f.predict(GarchParams{omega, {alpha}, {}});
    const auto step = evaluate_step(f, x);
    REQUIRE(step.hess.has_value());
    const auto eig = symmetric_eigenvalues(*step.hess);
    const double x4 = x_prev * x_prev * x_prev * x_prev;
    const double lambda2 = (1.0 + x4) * (2.0 * x * x - v) / (2.0 * v * v * v);
    const double lo = std::min(0.0, lambda2);
    const double hi = std::max(0.0, lambda2);
    REQUIRE_THAT(eig[0], WithinAbs(lo, 1e-10));
    REQUIRE_THAT(eig[1], WithinAbs(hi, 1e-10));
  }
}

TEST_CASE("fraction of convex ARCH(1) steps", "[ql_loss]") {
  // A single ARCH(1) step is convex iff 2 X_t^2 >= sigma2_t, i.e. Z_t^2 >= 1/2.
  const double expected = std::erfc(0.5);
  CHECK_THAT(expected, WithinAbs(0.4795, 1e-4));
  const GarchParams params{2.0, {0.6}, {}};
  const auto sim = simulate(params, 100000, kDefaultBurnIn, 2);
  VolFilter f({1, 0}, Parameterization::full, 0.0, true);
  std::size_t convex = 0;
  std::size_t total = 0;
  for (std::size_t t = 0; t < sim.returns.size(); ++t) {
    f.predict(params);
    if (t > 0) {
      const auto step = evaluate_step(f, sim.returns[t]);
      if (symmetric_eigenvalues(*step.hess).front() >= -1e-14) ++convex;
      ++total;
    }
    f.observe(sim.returns[t]);
  }
  const double fraction = static_cast<double>(convex) / static_cast<double>(total);
  CHECK_THAT(fraction, WithinAbs(expected, 0.01));
}

TEST_CASE("smallest Hessian eigenvalue by window", "[ql_loss]") {
  SECTION("single non-convex ARCH(1) observation") {
    // sigma2 = 1 + 0.5 * 1 = 1.5 and X^2 = 0.01 < sigma2 / 2.
    const std::vector<double> x{1.0, 0.1};
    const auto eig = min_hessian_eig(std::span<const double>(x).subspan(0, 2),
                                     GarchParams{1.0, {0.5}, {}}, 2);
    REQUIRE(eig.size() == 1);
    CHECK(eig.front() < 0.0);
    VolFilter f({1, 0}, Parameterization::full, 0.0, true);
    f.observe(1.0);
    f.predict(GarchParams{1.0, {0.5}, {}});
    const auto step = evaluate_step(f, 0.1);
    CHECK(symmetric_eigenvalues(*step.hess).front() < 0.0);
  }
  SECTION("window smaller than the dimension") {
    const std::vector<double> x(10, 1.0);
    CHECK_THROWS_AS(min_hessian_eig(x, GarchParams{1.0, {0.1}, {0.1}}, 2), WindowTooSmall);
  }
  SECTION("trailing partial window is dropped") {
    const auto x = normal_stream(25, 3);
    CHECK(min_hessian_eig(x, GarchParams{1.0, {0.1}, {0.1}}, 10).size() == 2);
  }
  SECTION("positive near the truth on long windows") {
    int positive = 0;
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
      const auto sim = simulate(GarchParams{2.0, {0.6}, {}}, 5000, kDefaultBurnIn, 70 + s);
      const auto eig = min_hessian_eig(sim.returns, GarchParams{2.0, {0.6}, {}}, 5000);
      if (eig.front() > 0.0) ++positive;
    }
    CHECK(positive >= 19);
  }
}
