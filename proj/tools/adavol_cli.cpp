// Command-line front end: simulate, fit, compare, bench.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "adavol/adavol.hpp"
#include "adavol/batch_qmle.hpp"
#include "adavol/data_ingest.hpp"
#include "adavol/errors.hpp"
#include "adavol/experiment.hpp"
#include "adavol/export.hpp"
#include "adavol/garch.hpp"
#include "adavol/metrics.hpp"

namespace fs = std::filesystem;
using namespace adavol;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& field : split_csv_line(text, ',')) {
    if (field.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(field, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != field.size()) throw InvalidConfig("not a number: '" + field + "'");
    out.push_back(v);
  }
  return out;
}

ModelOrder parse_order(const std::string& text) {
  const auto parts = split_csv_line(text, ',');
  if (parts.size() != 2) throw InvalidConfig("order must be given as p,q");
  auto count = [](const std::string& s) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
      throw InvalidConfig("order entries must be non-negative integers");
    }
    return static_cast<std::size_t>(std::stoul(s));
  };
  ModelOrder order{count(parts[0]), count(parts[1])};
  if (order.p + order.q == 0) throw InvalidConfig("order needs p + q >= 1");
  return order;
}

/// "omega,alpha...,beta..." for the given order.
GarchParams parse_params(const std::string& text, ModelOrder order) {
  const auto values = parse_list(text);
  if (values.size() != order.full_dim()) {
    throw InvalidConfig("expected " + std::to_string(order.full_dim()) +
                        " values (omega, alphas, betas), got " + std::to_string(values.size()));
  }
  return GarchParams::from_vector(values, order);
}

MeanRecursion parse_mean_recursion(const std::string& text) {
  if (text == "standard") return MeanRecursion::standard;
  if (text == "shifted") return MeanRecursion::shifted;
  throw InvalidConfig("mean recursion must be 'standard' or 'shifted'");
}

fs::path default_out_dir() {
  if (const char* env = std::getenv("ADAVOL_OUT_DIR"); env != nullptr && *env != '\0') return env;
  return "adavol_out";
}

std::string run_file_name(std::size_t run) {
  std::ostringstream os;
  os << "sim_" << std::setw(4) << std::setfill('0') << run << ".csv";
  return os.str();
}

template <typename Fn>
void write_stream(const fs::path& path, Fn&& fn) {
  std::ostringstream os;
  fn(os);
  write_text_file(path, os.str());
}

/// Options shared by fit and compare.
struct EstimatorFlags {
  std::string order = "1,1";
  double eta = 0.1;
  double eps = 1e-8;
  double margin = 1e-6;
  std::string mean_recursion = "standard";
  std::size_t minibatch = 1;
  std::size_t increment = 2000;
  std::string batch_mode = "full";

  void add_to(CLI::App* app) {
    app->add_option("--order", order, "Model order p,q")->capture_default_str();
    app->add_option("--eta", eta, "AdaVol learning rate")->capture_default_str();
    app->add_option("--eps", eps, "AdaGrad accumulator start")->capture_default_str();
    app->add_option("--margin", margin, "Stationarity margin")->capture_default_str();
    app->add_option("--mean-recursion", mean_recursion, "standard or shifted")
        ->check(CLI::IsMember({"standard", "shifted"}))
        ->capture_default_str();
    app->add_option("--minibatch", minibatch, "Gradients averaged per step")->capture_default_str();
    app->add_option("--increment", increment, "Batch refit increment")->capture_default_str();
    app->add_option("--batch-mode", batch_mode, "Batch parameterization: full or vte")
        ->check(CLI::IsMember({"full", "vte"}))
        ->capture_default_str();
  }

  AdaVolConfig adavol_config() const {
    AdaVolConfig cfg;
    cfg.order = parse_order(order);
    cfg.eta = eta;
    cfg.eps = eps;
    cfg.margin = margin;
    cfg.mean_recursion = parse_mean_recursion(mean_recursion);
    cfg.minibatch = minibatch;
    cfg.validate();
    return cfg;
  }

  Parameterization mode() const {
    return batch_mode == "vte" ? Parameterization::vte : Parameterization::full;
  }

  RefitSchedule schedule() const {
    if (increment == 0) throw InvalidConfig("increment must be at least 1");
    return RefitSchedule{increment, true};
  }

  FitOptions fit_options() const {
    FitOptions opts;
    opts.margin = margin;
    return opts;
  }
};

struct SimulateArgs {
  std::string order = "1,1";
  std::size_t n = 20000;
  std::size_t runs = 1;
  std::uint64_t seed = 0;
  std::size_t burn_in = kDefaultBurnIn;
  std::string theta;
  std::string out;
};

int cmd_simulate(const SimulateArgs& a) {
  ExperimentSpec spec;
  spec.order = parse_order(a.order);
  spec.n = a.n;
  spec.runs = a.runs;
  spec.seed = a.seed;
  spec.burn_in = a.burn_in;
  if (!a.theta.empty()) {
    spec.truth_policy = ParamPolicy::fixed;
    spec.truth = parse_params(a.theta, spec.order);
  }
  spec.init_policy = ParamPolicy::fixed;
  spec.init = GarchParams{1.0, std::vector<double>(spec.order.p, 0.0),
                          std::vector<double>(spec.order.q, 0.0)};
  spec.validate();

  const fs::path dir = a.out.empty() ? default_out_dir() : fs::path(a.out);
  std::vector<std::string> files;
  for (std::size_t r = 0; r < spec.runs; ++r) {
    const SimOutput sim = simulate(spec.truth_for(r), spec.n, spec.burn_in, spec.sim_seed(r));
    files.push_back(run_file_name(r));
    write_stream(dir / files.back(), [&](std::ostream& os) { write_simulation_csv(os, sim); });
  }
  write_text_file(dir / "manifest.json", simulation_manifest_json(spec, files) + "\n");
  std::cout << "wrote " << spec.runs << " series to " << dir.string() << "\n";
  return kExitOk;
}

struct InputArgs {
  std::string input;
  std::string column = "return";
  bool prices = false;
  std::string date_column = "Date";
  std::string close_column = "Close";

  void add_to(CLI::App* app) {
    app->add_option("--input", input, "CSV file with returns (or prices with --prices)")
        ->required()
        ->check(CLI::ExistingFile);
    app->add_option("--column", column, "Return column name")->capture_default_str();
    app->add_flag("--prices", prices, "Input holds closing prices; log returns are taken");
    app->add_option("--date-column", date_column, "Date column for --prices")->capture_default_str();
    app->add_option("--close-column", close_column, "Close column for --prices")
        ->capture_default_str();
  }

  std::vector<double> load() const {
    if (prices) {
      CsvFormat fmt;
      fmt.date_column = date_column;
      fmt.close_column = close_column;
      return log_returns(load_prices(input, fmt)).returns;
    }
    return load_column(input, column);
  }
};

struct FitArgs {
  InputArgs input;
  EstimatorFlags est;
  std::string method = "adavol";
  std::string theta0;
  bool allow_nonconvergence = false;
  std::string out;
};

std::vector<double> default_start(ModelOrder order, double variance, bool with_omega) {
  // Moderate persistence split evenly over the lags.
  const double alpha_total = order.q == 0 ? 0.5 : 0.1;
  const double beta_total = order.p == 0 ? 0.5 : 0.8;
  std::vector<double> theta;
  if (with_omega) theta.push_back(variance * (1.0 - (order.p ? alpha_total : 0.0) -
                                              (order.q ? beta_total : 0.0)));
  for (std::size_t i = 0; i < order.p; ++i) theta.push_back(alpha_total / static_cast<double>(order.p));
  for (std::size_t j = 0; j < order.q; ++j) theta.push_back(beta_total / static_cast<double>(order.q));
  return theta;
}

int cmd_fit(const FitArgs& a) {
  const AdaVolConfig cfg = a.est.adavol_config();
  const ModelOrder order = cfg.order;
  const std::vector<double> series = a.input.load();
  const fs::path dir = a.out.empty() ? default_out_dir() : fs::path(a.out);

  double variance = 0.0;
  for (const double x : series) variance += x * x;
  variance /= static_cast<double>(series.size());

  if (a.method == "adavol") {
    std::vector<double> theta0;
    if (a.theta0.empty()) {
      theta0 = default_start(order, variance, false);
    } else {
      theta0 = parse_list(a.theta0);
      // A full (omega, alpha, beta) start is accepted; omega is dropped.
      if (theta0.size() == order.full_dim()) theta0.erase(theta0.begin());
    }
    const StreamResult result = run_stream(series, theta0, cfg);
    write_stream(dir / "trajectory.csv",
                 [&](std::ostream& os) { write_trajectory_csv(os, result, order); });
    const auto theta = result.final_state.theta();
    std::cout << "adavol: n=" << series.size() << " omega=" << result.final_state.implied_omega();
    const auto names = parameter_columns(order, false);
    for (std::size_t k = 0; k < names.size(); ++k) std::cout << ' ' << names[k] << '=' << theta[k];
    std::cout << "\n";
    return kExitOk;
  }

  const Parameterization mode = a.est.mode();
  const RefitSchedule schedule = a.est.schedule();
  if (series.size() < schedule.increment) {
    std::cerr << "warning: " << series.size() << " observations is fewer than the refit increment "
              << schedule.increment << "; using a single fit\n";
  }
  std::vector<double> theta0 =
      a.theta0.empty() ? default_start(order, variance, mode == Parameterization::full)
                       : parse_list(a.theta0);
  if (mode == Parameterization::vte && theta0.size() == order.full_dim()) {
    theta0.erase(theta0.begin());
  }
  const RollingResult result =
      rolling_refit(series, theta0, order, schedule, mode, a.est.fit_options());
  write_stream(dir / "rolling.csv",
               [&](std::ostream& os) { write_rolling_csv(os, result, order, mode); });
  const FitResult& last = result.fits.back();
  const GarchParams p = last.params();
  std::cout << "batch: n=" << series.size() << " fits=" << result.fits.size()
            << " omega=" << p.omega;
  for (std::size_t i = 0; i < p.alpha.size(); ++i) std::cout << " alpha" << i + 1 << '=' << p.alpha[i];
  for (std::size_t j = 0; j < p.beta.size(); ++j) std::cout << " beta" << j + 1 << '=' << p.beta[j];
  std::cout << " nonconverged=" << result.nonconverged << "\n";
  if (result.nonconverged > 0 && !a.allow_nonconvergence) {
    std::cerr << "error: " << result.nonconverged << " of " << result.fits.size()
              << " fits did not converge\n";
    return kExitNumerical;
  }
  return kExitOk;
}

struct CompareArgs {
  EstimatorFlags est;
  std::size_t n = 20000;
  std::size_t runs = 100;
  std::uint64_t seed = 0;
  std::string truth;
  std::string init;
  std::string alphas;
  std::size_t jobs = 1;
  std::string input_file;
  std::string column = "return";
  std::string out;
};

std::vector<double> alpha_grid(const std::string& text) {
  if (text.empty()) return default_alpha_grid();
  return parse_list(text);
}

int compare_on_file(const CompareArgs& a) {
  const AdaVolConfig cfg = a.est.adavol_config();
  const ModelOrder order = cfg.order;
  const std::vector<double> series = load_column(a.input_file, a.column);
  const auto alphas = alpha_grid(a.alphas);
  GarchParams init;
  if (a.init.empty()) {
    double variance = 0.0;
    for (const double x : series) variance += x * x;
    init = GarchParams::from_vector(
        default_start(order, variance / static_cast<double>(series.size()), true), order);
  } else {
    init = parse_params(a.init, order);
  }
  std::vector<double> coeffs(init.alpha);
  coeffs.insert(coeffs.end(), init.beta.begin(), init.beta.end());

  const StreamResult stream = run_stream(series, coeffs, cfg);
  const Parameterization mode = a.est.mode();
  const RollingResult rolling =
      rolling_refit(series, mode == Parameterization::full ? init.to_vector() : coeffs, order,
                    a.est.schedule(), mode, a.est.fit_options());
  const EvalReport ra = evaluate(series, stream.predicted_variance, std::nullopt, alphas);
  const EvalReport rb = evaluate(series, rolling.variance, std::nullopt, alphas);

  const fs::path dir = a.out.empty() ? default_out_dir() : fs::path(a.out);
  write_text_file(dir / "report.json", "{\"adavol\":" + ra.to_json() + ",\"batch\":" +
                                           rb.to_json() + "}\n");
  std::cout << "method," << EvalReport::csv_header() << "\n"
            << "adavol," << ra.to_csv_row() << "\n"
            << "batch," << rb.to_csv_row() << "\n";
  return kExitOk;
}

int cmd_compare(const CompareArgs& a) {
  if (!a.input_file.empty()) return compare_on_file(a);

  ExperimentSpec spec;
  spec.adavol = a.est.adavol_config();
  spec.order = spec.adavol.order;
  spec.n = a.n;
  spec.runs = a.runs;
  spec.seed = a.seed;
  spec.jobs = a.jobs;
  spec.schedule = a.est.schedule();
  spec.fit_options = a.est.fit_options();
  spec.batch_mode = a.est.mode();
  spec.alphas = alpha_grid(a.alphas);
  if (!a.truth.empty()) {
    spec.truth_policy = ParamPolicy::fixed;
    spec.truth = parse_params(a.truth, spec.order);
  }
  if (!a.init.empty()) {
    spec.init_policy = ParamPolicy::fixed;
    spec.init = parse_params(a.init, spec.order);
  }
  spec.validate();
  if (spec.n < spec.schedule.increment) {
    std::cerr << "warning: n=" << spec.n << " is below the refit increment "
              << spec.schedule.increment << "; the batch baseline uses a single fit\n";
  }

  const auto results = run_experiment(spec);
  const auto summary = summarize(results);
  const fs::path dir = a.out.empty() ? default_out_dir() : fs::path(a.out);
  write_stream(dir / "runs.csv", [&](std::ostream& os) { write_runs_csv(os, results); });
  write_stream(dir / "summary.csv", [&](std::ostream& os) { write_summary_csv(os, summary); });
  write_text_file(dir / "report.json", experiment_json(spec, results, summary) + "\n");

  std::cout << "method,metric,min,q25,median,q75,max\n";
  for (const auto& s : summary) {
    std::cout << s.method << ',' << s.metric << ',' << s.stats.min << ',' << s.stats.q25 << ','
              << s.stats.median << ',' << s.stats.q75 << ',' << s.stats.max << "\n";
  }
  return kExitOk;
}

struct BenchArgs {
  std::vector<std::string> orders{"1,0", "1,1"};
  std::vector<std::size_t> sizes{1000, 2000};
  std::size_t repeats = 5;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_bench(const BenchArgs& a) {
  std::vector<BenchRow> rows;
  for (const auto& o : a.orders) {
    const ModelOrder order = parse_order(o);
    for (const std::size_t n : a.sizes) rows.push_back(bench(order, n, a.seed, a.repeats));
  }
  std::ostringstream os;
  write_bench_csv(os, rows);
  std::cout << os.str();
  if (!a.out.empty()) write_text_file(fs::path(a.out) / "bench.csv", os.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming and batch GARCH estimation"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate GARCH paths");
  sim_cmd->add_option("--order", sim.order, "Model order p,q")->capture_default_str();
  sim_cmd->add_option("--n", sim.n, "Observations per path")->capture_default_str();
  sim_cmd->add_option("--runs", sim.runs, "Number of paths")->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed, "Base seed")->capture_default_str();
  sim_cmd->add_option("--burn-in", sim.burn_in, "Discarded warm-up steps")->capture_default_str();
  sim_cmd->add_option("--theta", sim.theta, "Fixed omega,alpha...,beta... (random if omitted)");
  sim_cmd->add_option("--out", sim.out, "Output directory");

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "Estimate parameters on a series");
  fit_args.input.add_to(fit_cmd);
  fit_args.est.add_to(fit_cmd);
  fit_cmd->add_option("--method", fit_args.method, "adavol or batch")
      ->check(CLI::IsMember({"adavol", "batch"}))
      ->capture_default_str();
  fit_cmd->add_option("--theta0", fit_args.theta0, "Start vector");
  fit_cmd->add_flag("--allow-nonconvergence", fit_args.allow_nonconvergence,
                    "Exit 0 even when some batch fits hit the iteration limit");
  fit_cmd->add_option("--out", fit_args.out, "Output directory");

  CompareArgs cmp;
  auto* cmp_cmd = app.add_subcommand("compare", "Score AdaVol against the batch baseline");
  cmp.est.add_to(cmp_cmd);
  cmp_cmd->add_option("--n", cmp.n, "Observations per path")->capture_default_str();
  cmp_cmd->add_option("--runs", cmp.runs, "Monte Carlo runs")->capture_default_str();
  cmp_cmd->add_option("--seed", cmp.seed, "Base seed")->capture_default_str();
  cmp_cmd->add_option("--truth", cmp.truth, "Fixed true omega,alpha...,beta...");
  cmp_cmd->add_option("--init", cmp.init, "Fixed start omega,alpha...,beta...");
  cmp_cmd->add_option("--alphas", cmp.alphas, "Quantile levels (default 0.01..0.99)");
  cmp_cmd->add_option("--jobs", cmp.jobs, "Concurrent runs")->capture_default_str();
  cmp_cmd->add_option("--input", cmp.input_file, "Score a returns CSV instead of simulating")
      ->check(CLI::ExistingFile);
  cmp_cmd->add_option("--column", cmp.column, "Return column of --input")->capture_default_str();
  cmp_cmd->add_option("--out", cmp.out, "Output directory");

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench", "Relative speed of AdaVol against batch re-fits");
  bench_cmd->add_option("--orders", bench_args.orders, "Orders as p,q (repeatable)")
      ->delimiter(';')
      ->capture_default_str();
  bench_cmd->add_option("--sizes", bench_args.sizes, "Series lengths")
      ->delimiter(',')
      ->capture_default_str();
  bench_cmd->add_option("--repeats", bench_args.repeats, "AdaVol timing repeats")
      ->capture_default_str();
  bench_cmd->add_option("--seed", bench_args.seed, "Simulation seed")->capture_default_str();
  bench_cmd->add_option("--out", bench_args.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*sim_cmd) return cmd_simulate(sim);
    if (*fit_cmd) return cmd_fit(fit_args);
    if (*cmp_cmd) return cmd_compare(cmp);
    if (*bench_cmd) return cmd_bench(bench_args);
  } catch (const NonPositiveVariance& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const NonFiniteInput& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const DomainError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
