#include "adavol/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

#include "adavol/errors.hpp"
#include "rng.hpp"

namespace adavol {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_order(const GarchParams& params, ModelOrder order, const char* what) {
  if (!(params.order() == order)) {
    throw InvalidConfig(std::string(what) + " parameters do not match the model order");
  }
}

std::vector<double> coefficients_of(const GarchParams& params) {
  std::vector<double> out(params.alpha);
  out.insert(out.end(), params.beta.begin(), params.beta.end());
  return out;
}

std::vector<std::string> param_names(ModelOrder order, bool with_omega) {
  std::vector<std::string> names;
  if (with_omega) names.emplace_back("omega");
  for (std::size_t i = 1; i <= order.p; ++i) names.push_back("alpha" + std::to_string(i));
  for (std::size_t j = 1; j <= order.q; ++j) names.push_back("beta" + std::to_string(j));
  return names;
}

GarchParams bench_params(ModelOrder order) {
  GarchParams params;
  params.omega = 0.05;
  const double alpha_total = order.q == 0 ? 0.5 : 0.15;
  params.alpha.assign(order.p, alpha_total / static_cast<double>(std::max<std::size_t>(order.p, 1)));
  params.beta.assign(order.q, 0.8 / static_cast<double>(std::max<std::size_t>(order.q, 1)));
  return params;
}

}  // namespace

void ExperimentSpec::validate() const {
  order.validate();
  if (n == 0) throw InvalidConfig("n must be at least 1");
  if (runs == 0) throw InvalidConfig("runs must be at least 1");
  if (jobs == 0) throw InvalidConfig("jobs must be at least 1");
  if (alphas.empty()) throw InvalidConfig("at least one quantile level is required");
  for (const double a : alphas) {
    if (!(a > 0.0 && a < 1.0)) throw InvalidConfig("quantile levels must lie in (0, 1)");
  }
  if (truth_policy == ParamPolicy::fixed) {
    if (!truth) throw InvalidConfig("fixed truth policy needs parameters");
    check_order(*truth, order, "true");
    adavol::validate(*truth, true);
  }
  if (init_policy == ParamPolicy::fixed) {
    if (!init) throw InvalidConfig("fixed init policy needs parameters");
    check_order(*init, order, "initial");
  }
  AdaVolConfig cfg = adavol;
  cfg.order = order;
  cfg.validate();
  if (schedule.increment == 0) throw InvalidConfig("refit increment must be at least 1");
}

GarchParams ExperimentSpec::truth_for(std::size_t run) const {
  if (truth_policy == ParamPolicy::fixed) return *truth;
  return random_params(order, detail::derive_seed(seed, 3 * run));
}

GarchParams ExperimentSpec::init_for(std::size_t run) const {
  if (init_policy == ParamPolicy::fixed) return *init;
  return random_params(order, detail::derive_seed(seed, 3 * run + 1));
}

std::uint64_t ExperimentSpec::sim_seed(std::size_t run) const {
  return detail::derive_seed(seed, 3 * run + 2);
}

RunResult run_single(const ExperimentSpec& spec, std::size_t run) {
  RunResult out;
  out.run = run;
  out.truth = spec.truth_for(run);
  out.init = spec.init_for(run);
  out.sim_seed = spec.sim_seed(run);
  const SimOutput sim = simulate(out.truth, spec.n, spec.burn_in, out.sim_seed);
  const std::span<const double> truth_var(sim.true_vol2);

  AdaVolConfig cfg = spec.adavol;
  cfg.order = spec.order;
  auto start = Clock::now();
  const StreamResult stream = run_stream(sim.returns, coefficients_of(out.init), cfg);
  out.adavol.seconds = seconds_since(start);
  const auto theta = stream.final_state.theta();
  out.adavol.theta.assign(theta.begin(), theta.end());
  out.adavol.omega = stream.final_state.implied_omega();
  out.adavol.report = evaluate(sim.returns, stream.predicted_variance, truth_var, spec.alphas);

  if (spec.run_batch) {
    MethodResult batch;
    const std::vector<double> theta0 = spec.batch_mode == Parameterization::full
                                           ? out.init.to_vector()
                                           : coefficients_of(out.init);
    start = Clock::now();
    const RollingResult rolling = rolling_refit(sim.returns, theta0, spec.order, spec.schedule,
                                                spec.batch_mode, spec.fit_options);
    batch.seconds = seconds_since(start);
    batch.theta = rolling.fits.back().theta;
    batch.omega = rolling.fits.back().params().omega;
    batch.iterations = rolling.total_iterations;
    batch.nonconverged = rolling.nonconverged;
    batch.report = evaluate(sim.returns, rolling.variance, truth_var, spec.alphas);
    out.batch = std::move(batch);
  }
  return out;
}

std::vector<RunResult> run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<RunResult> results(spec.runs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::atomic<bool> stop{false};

  auto worker = [&] {
    while (!stop.load()) {
      const std::size_t run = next.fetch_add(1);
      if (run >= spec.runs) return;
      try {
        results[run] = run_single(spec, run);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        stop = true;
      }
    }
  };

  const std::size_t threads = std::min(spec.jobs, spec.runs);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw EmptySeries("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

FiveNumber FiveNumber::of(std::span<const double> values) {
  if (values.empty()) throw EmptySeries("five-number summary of an empty sample");
  std::vector<double> kept;
  kept.reserve(values.size());
  for (const double v : values) {
    if (!std::isnan(v)) kept.push_back(v);
  }
  if (kept.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan, nan, nan, nan};
  }
  std::sort(kept.begin(), kept.end());
  return {kept.front(), quantile(kept, 0.25), quantile(kept, 0.5), quantile(kept, 0.75),
          kept.back()};
}

std::vector<MetricSummary> summarize(std::span<const RunResult> results) {
  std::vector<MetricSummary> out;
  if (results.empty()) return out;
  const ModelOrder order = results.front().truth.order();

  auto add_method = [&](const std::string& method, auto&& get, bool vte) {
    std::vector<double> mpe, mape, mae, qs, omega;
    const auto names = param_names(order, !vte);
    std::vector<std::vector<double>> params(names.size());
    for (const auto& r : results) {
      const MethodResult& m = get(r);
      mpe.push_back(m.report.mpe);
      mape.push_back(m.report.mape);
      mae.push_back(m.report.mae);
      qs.push_back(m.report.qs);
      omega.push_back(m.omega);
      for (std::size_t k = 0; k < names.size() && k < m.theta.size(); ++k) {
        params[k].push_back(m.theta[k]);
      }
    }
    out.push_back({method, "mpe", FiveNumber::of(mpe)});
    out.push_back({method, "mape", FiveNumber::of(mape)});
    out.push_back({method, "mae", FiveNumber::of(mae)});
    out.push_back({method, "qs", FiveNumber::of(qs)});
    if (vte) out.push_back({method, "omega", FiveNumber::of(omega)});
    for (std::size_t k = 0; k < names.size(); ++k) {
      if (!params[k].empty()) out.push_back({method, names[k], FiveNumber::of(params[k])});
    }
  };

  add_method("adavol", [](const RunResult& r) -> const MethodResult& { return r.adavol; }, true);
  const bool has_batch = std::all_of(results.begin(), results.end(),
                                     [](const RunResult& r) { return r.batch.has_value(); });
  if (has_batch) {
    const bool batch_vte = results.front().batch->theta.size() == order.vte_dim();
    add_method("batch", [](const RunResult& r) -> const MethodResult& { return *r.batch; },
               batch_vte);
  }
  return out;
}

BenchRow bench(ModelOrder order, std::size_t n, std::uint64_t seed, std::size_t repeats,
               const FitOptions& options) {
  order.validate();
  if (n == 0) throw InvalidConfig("bench needs n >= 1");
  if (repeats == 0) throw InvalidConfig("bench needs at least one repeat");
  const GarchParams params = bench_params(order);
  const SimOutput sim = simulate(params, n, kDefaultBurnIn, seed);
  const std::span<const double> series(sim.returns);

  BenchRow row;
  row.order = order;
  row.n = n;

  AdaVolConfig cfg;
  cfg.order = order;
  const std::vector<double> start_coeffs(order.vte_dim(), 0.5 / static_cast<double>(order.vte_dim()));
  double checksum = 0.0;
  row.adavol_seconds = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < repeats; ++r) {
    const auto t0 = Clock::now();
    AdaVolEstimator est(start_coeffs, cfg);
    for (const double x : series) checksum += est.update(x);
    row.adavol_seconds = std::min(row.adavol_seconds, seconds_since(t0));
  }

  std::vector<double> start{params.omega};
  start.insert(start.end(), start_coeffs.begin(), start_coeffs.end());
  const std::size_t first = 10 * order.full_dim();
  const auto t0 = Clock::now();
  for (std::size_t t = first; t <= n; ++t) {
    const FitResult result = fit(series.first(t), start, order, Parameterization::full, options);
    start = result.theta;
    checksum += result.objective;
    ++row.batch_fits;
  }
  row.batch_seconds = seconds_since(t0);
  // Keeps the timed work observable.
  if (!std::isfinite(checksum)) row.batch_seconds = std::numeric_limits<double>::infinity();
  return row;
}

}  // namespace adavol
