// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Optional arguments select criteria by number, e.g. `acceptance 4 6`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "../unit/oracles.hpp"
#include "adavol/adavol.hpp"
#include "adavol/batch_qmle.hpp"
#include "adavol/data_ingest.hpp"
#include "adavol/experiment.hpp"
#include "adavol/garch.hpp"
#include "adavol/metrics.hpp"
#include "adavol/ql_loss.hpp"
#include "adavol/vol_filter.hpp"

using namespace adavol;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

template <typename... Args>
std::string fmtn(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

// 1. Analytic batch gradient against central differences of an independent
// loss implementation.
Outcome gradient_correctness() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(20240101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 1.0);
  const double h = 1e-6;
  double worst = 0.0;
  for (int c = 0; c < 100; ++c) {
    const ModelOrder order = c % 2 ? ModelOrder{1, 1} : ModelOrder{1, 0};
    std::vector<double> theta{0.05 + u(gen)};
    double a = u(gen);
    double b = order.q ? u(gen) : 0.0;
    while (a + b >= 0.98) {
      a = u(gen);
      b = order.q ? u(gen) : 0.0;
    }
    theta.push_back(a);
    if (order.q) theta.push_back(b);
    std::vector<double> x(50);
    for (auto& v : x) v = z(gen) * std::sqrt(theta[0] / (1.0 - a - b));

    const auto g = batch_loss(x, GarchParams::from_vector(theta, order)).grad;
    std::vector<double> fd(theta.size());
    double fd_norm = 0.0;
    double diff_norm = 0.0;
    for (std::size_t k = 0; k < theta.size(); ++k) {
      auto up = theta;
      auto dn = theta;
      up[k] += h;
      dn[k] -= h;
      fd[k] = (oracle::loss_full(x, up, order.p, order.q) -
               oracle::loss_full(x, dn, order.p, order.q)) / (2.0 * h);
      fd_norm = std::max(fd_norm, std::abs(fd[k]));
      diff_norm = std::max(diff_norm, std::abs(fd[k] - g[k]));
    }
    worst = std::max(worst, diff_norm / fd_norm);
  }
  const double elapsed = seconds_since(t0);
  return {worst < 1e-5 && elapsed < 10.0,
          fmtn("worst relative error %.2e over 100 cases, %.2fs", worst, elapsed)};
}

// 2. ARCH(1) per-step Hessian eigenvalues against the closed form.
Outcome hessian_eigenvalues() {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double omega = 0.1 + 2.0 * u(gen);
    const double alpha = u(gen);
    const double x_prev = 1.5 * z(gen);
    const double x = 1.5 * z(gen);
    VolFilter f({1, 0}, Parameterization::full, 0.0, true);
    f.observe(x_prev);
    const double v = f.predict(GarchParams{omega, {alpha}, {}});
    const auto step = evaluate_step(f, x);
    const auto eig = symmetric_eigenvalues(*step.hess);
    const double x4 = std::pow(x_prev, 4);
    const double lambda2 = (1.0 + x4) * (2.0 * x * x - v) / (2.0 * v * v * v);
    const double lo = std::min(0.0, lambda2);
    const double hi = std::max(0.0, lambda2);
    worst = std::max({worst, std::abs(eig[0] - lo), std::abs(eig[1] - hi)});
  }
  return {worst <= 1e-10, fmt("worst absolute error %.2e over 1000 points", worst)};
}

// 3. Projection against an exact enumeration of KKT faces.
std::vector<double> brute_projection(const std::vector<double>& v, double cap) {
  const std::size_t d = v.size();
  std::vector<double> best;
  double best_dist = INFINITY;
  for (unsigned mask = 0; mask < (1u << d); ++mask) {
    for (int active = 0; active < 2; ++active) {
      std::vector<double> x(d, 0.0);
      double sum_free = 0.0;
      std::size_t count = 0;
      for (std::size_t i = 0; i < d; ++i) {
        if (mask & (1u << i)) {
          sum_free += v[i];
          ++count;
        }
      }
      if (active && count == 0) continue;
      const double shift = active ? (sum_free - cap) / static_cast<double>(count) : 0.0;
      bool feasible = true;
      double total = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        if (mask & (1u << i)) {
          x[i] = v[i] - shift;
          if (x[i] < -1e-15) feasible = false;
          x[i] = std::max(x[i], 0.0);
          total += x[i];
        }
      }
      if (!feasible || total > cap + 1e-12) continue;
      double dist = 0.0;
      for (std::size_t i = 0; i < d; ++i) dist += (x[i] - v[i]) * (x[i] - v[i]);
      if (dist < best_dist) {
        best_dist = dist;
        best = x;
      }
    }
  }
  return best;
}

Outcome projection_oracle() {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_int_distribution<int> dim(1, 4);
  const double cap = 1.0 - 1e-6;
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    std::vector<double> v(static_cast<std::size_t>(dim(gen)));
    for (auto& c : v) c = u(gen);
    const auto got = project_capped_simplex(v, cap);
    const auto want = brute_projection(v, cap);
    for (std::size_t i = 0; i < v.size(); ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
  }
  return {worst <= 1e-8, fmt("worst deviation %.2e over 1000 vectors", worst)};
}

// 4. ARCH(1) recovery in the easy regime.
Outcome easy_recovery() {
  const auto t0 = Clock::now();
  const GarchParams truth{2.0, {0.6}, {}};
  AdaVolConfig cfg;
  cfg.order = {1, 0};
  const std::vector<double> init{0.4};  // start (1.5, 0.4); omega is not estimated directly
  int hits = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto sim = simulate(truth, 20000, kDefaultBurnIn, 1000 + s);
    AdaVolEstimator est(init, cfg);
    for (const double x : sim.returns) est.update(x);
    const double a = est.theta()[0];
    const double w = est.implied_omega();
    if (std::abs(a - 0.6) <= 0.05 && std::abs(w - 2.0) <= 0.15 * 2.0) ++hits;
  }
  const double elapsed = seconds_since(t0);
  return {hits >= 90 && elapsed < 60.0, fmtn("%d/100 seeds within tolerance, %.1fs", hits, elapsed)};
}

// 5. Small-omega ARCH(1): spread of final alpha and direction of batch omega.
Outcome small_omega() {
  const GarchParams truth{1e-8, {0.6}, {}};
  AdaVolConfig cfg;
  cfg.order = {1, 0};
  const std::vector<double> ada_init{0.4};
  const std::vector<double> batch_init{5e-8, 0.4};
  std::vector<double> ada_alpha, batch_alpha, batch_omega;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto sim = simulate(truth, 20000, kDefaultBurnIn, 2000 + s);
    const auto stream = run_stream(sim.returns, ada_init, cfg);
    ada_alpha.push_back(stream.final_state.theta()[0]);
    const auto rolling = rolling_refit(sim.returns, batch_init, {1, 0}, RefitSchedule{});
    batch_omega.push_back(rolling.fits.back().theta[0]);
    batch_alpha.push_back(rolling.fits.back().theta[1]);
  }
  const auto ada = FiveNumber::of(ada_alpha);
  const auto bat = FiveNumber::of(batch_alpha);
  const double med_omega = quantile(batch_omega, 0.5);
  const bool spread = ada.iqr() < bat.iqr();
  const bool under = med_omega < 1e-8;
  return {spread && under,
          fmtn("alpha IQR adavol %.4f vs batch %.4f (%s); batch median omega %.4e (%s)", ada.iqr(),
               bat.iqr(), spread ? "smaller" : "not smaller", med_omega,
               under ? "under" : "not under")};
}

// 6. GARCH(1,1) recovery.
Outcome garch_recovery() {
  const GarchParams truth{1e-8, {0.2}, {0.7}};
  AdaVolConfig cfg;
  const std::vector<double> init{0.1, 0.8};
  double sa = 0.0;
  double sb = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto sim = simulate(truth, 20000, kDefaultBurnIn, 3000 + s);
    AdaVolEstimator est(init, cfg);
    for (const double x : sim.returns) est.update(x);
    sa += est.theta()[0];
    sb += est.theta()[1];
  }
  const double ma = sa / 100.0;
  const double mb = sb / 100.0;
  return {std::abs(ma - 0.2) <= 0.1 && std::abs(mb - 0.7) <= 0.1,
          fmtn("mean alpha %.4f, mean beta %.4f", ma, mb)};
}

// 7. QS parity under random true parameters and random starts.
Outcome qs_parity() {
  std::string detail;
  bool pass = true;
  for (const ModelOrder order : {ModelOrder{1, 0}, ModelOrder{1, 1}}) {
    ExperimentSpec spec;
    spec.order = order;
    spec.n = 20000;
    spec.runs = 100;
    spec.seed = 7000 + order.q;
    const auto results = run_experiment(spec);
    std::vector<double> qa, qb;
    for (const auto& r : results) {
      qa.push_back(r.adavol.report.qs);
      qb.push_back(r.batch->report.qs);
    }
    const double ma = quantile(qa, 0.5);
    const double mb = quantile(qb, 0.5);
    const double gap = std::abs(ma - mb) / mb;
    pass = pass && gap <= 0.05;
    detail += fmtn("%s%s median QS adavol %.6g vs batch %.6g (gap %.2f%%)", detail.empty() ? "" : "; ",
                   order.q ? "GARCH(1,1)" : "ARCH(1)", ma, mb, 100.0 * gap);
  }
  return {pass, detail};
}

// 8. Streaming moments against direct sample statistics.
Outcome streaming_exactness() {
  std::mt19937_64 gen(88);
  double worst = 0.0;
  for (int s = 0; s < 20; ++s) {
    std::normal_distribution<double> z(std::ldexp(1.0, s % 7 - 3), 0.5 + s);
    StreamingMoments m(MeanRecursion::standard);
    std::vector<double> xs(10000);
    for (auto& x : xs) {
      x = z(gen);
      m.update(x);
    }
    long double mean = 0.0L;
    for (const double x : xs) mean += x;
    mean /= xs.size();
    long double ss = 0.0L;
    for (const double x : xs) ss += (x - mean) * (x - mean);
    const double var = static_cast<double>(ss / xs.size());
    const double mu = static_cast<double>(mean);
    worst = std::max(worst, std::abs(m.mean() - mu) / std::max(1.0, std::abs(mu)));
    worst = std::max(worst, std::abs(m.variance() - var) / std::max(1.0, var));
  }
  return {worst <= 1e-10, fmt("worst relative deviation %.2e over 20 streams", worst)};
}

// 9. VTE and full parameterizations give the same variances.
Outcome vte_equivalence() {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const ModelOrder order{1 + static_cast<std::size_t>(k % 2), static_cast<std::size_t>(k % 3)};
    const double gamma2 = 0.01 + 3.0 * u(gen);
    std::vector<double> c(order.vte_dim());
    double total;
    do {
      total = 0.0;
      for (auto& v : c) total += (v = u(gen));
    } while (total >= 0.999);
    const auto vte = VteParams::from_coefficients(c, order, gamma2);
    const auto full = vte.to_full();
    VolFilter fv(order, Parameterization::vte);
    VolFilter ff(order, Parameterization::full, gamma2);
    std::normal_distribution<double> z(0.0, std::sqrt(gamma2));
    for (int t = 0; t < 1000; ++t) {
      const double a = fv.predict(vte);
      const double b = ff.predict(full);
      worst = std::max(worst, std::abs(a - b) / b);
      const double x = z(gen);
      fv.observe(x);
      ff.observe(x);
    }
  }
  return {worst <= 1e-12, fmt("worst relative gap %.2e", worst)};
}

// 10. Relative speed under the every-t re-fit protocol.
Outcome speed() {
  const auto r1 = bench({1, 1}, 1000, 10, 20);
  const auto r2 = bench({1, 1}, 2000, 10, 20);
  return {r1.ratio() >= 50.0 && r2.ratio() >= r1.ratio(),
          fmtn("ratio %.1f at n=1000 (%.3fs vs %.2es), %.1f at n=2000", r1.ratio(), r1.batch_seconds,
               r1.adavol_seconds, r2.ratio())};
}

// 11. Price ingestion round trip and MAE comparison on simulated data.
Outcome real_data_path() {
  const auto dir = std::filesystem::temp_directory_path() / "adavol_acceptance";
  std::filesystem::create_directories(dir);
  const auto path = dir / "prices.csv";
  std::vector<double> prices{2500.0};
  {
    const auto sim = simulate(GarchParams{1e-6, {0.08}, {0.9}}, 3000, kDefaultBurnIn, 11);
    for (const double r : sim.returns) prices.push_back(prices.back() * std::exp(r));
    std::ofstream out(path);
    out.precision(17);
    out << "Date,Open,High,Low,Close\n";
    Date day{std::chrono::year{1990} / 1 / 1};
    for (const double p : prices) {
      out << format_date(day) << ",0,0,0," << p << '\n';
      day += std::chrono::days{1};
    }
  }
  const auto loaded = load_prices(path);
  const auto returns = log_returns(loaded);
  const auto back = prices_from_returns(loaded.close.front(), returns.returns);
  double worst = 0.0;
  for (std::size_t i = 0; i < prices.size(); ++i) {
    worst = std::max(worst, std::abs(back[i] - prices[i]) / prices[i]);
  }
  std::filesystem::remove_all(dir);
  const bool round_trip = back.size() == prices.size() && worst <= 1e-10;

  ExperimentSpec spec;
  spec.order = {1, 1};
  spec.n = 20000;
  spec.runs = 50;
  spec.seed = 11000;
  spec.truth_policy = ParamPolicy::fixed;
  spec.truth = GarchParams{1e-8, {0.2}, {0.7}};
  spec.init_policy = ParamPolicy::fixed;
  spec.init = GarchParams{5e-8, {0.1}, {0.8}};
  spec.alphas = {0.5};
  const auto results = run_experiment(spec);
  double ratio = 0.0;
  for (const auto& r : results) ratio += r.adavol.report.mae / r.batch->report.mae;
  ratio /= static_cast<double>(results.size());
  return {round_trip && ratio <= 1.1,
          fmtn("round trip worst %.2e; mean MAE ratio adavol/batch %.4f over 50 seeds", worst, ratio)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient matches finite differences", gradient_correctness},
      {"ARCH(1) Hessian eigenvalues match the closed form", hessian_eigenvalues},
      {"projection matches the brute-force oracle", projection_oracle},
      {"ARCH(1) recovery, theta0 = (2.0, 0.6)", easy_recovery},
      {"small-omega ARCH(1): alpha spread and batch omega direction", small_omega},
      {"GARCH(1,1) recovery, theta0 = (1e-8, 0.2, 0.7)", garch_recovery},
      {"QS parity under random parameters", qs_parity},
      {"streaming moments are exact", streaming_exactness},
      {"VTE and full variances agree", vte_equivalence},
      {"relative speed against every-t batch re-fits", speed},
      {"price ingestion round trip and MAE comparison", real_data_path},
  };

  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    if (!outcome.pass) ++failures;
    std::printf("%s criterion %d: %s -- %s\n", outcome.pass ? "PASS" : "FAIL", id,
                criteria[i].first.c_str(), outcome.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
