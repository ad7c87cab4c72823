#include "adavol/export.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace adavol {

namespace {

using nlohmann::json;

class CsvRow {
 public:
  explicit CsvRow(std::ostream& out) : out_(out) { out_.precision(17); }
  CsvRow& operator<<(double v) {
    sep();
    if (std::isfinite(v)) out_ << v;
    return *this;
  }
  CsvRow& operator<<(std::size_t v) {
    sep();
    out_ << v;
    return *this;
  }
  CsvRow& operator<<(const std::string& v) {
    sep();
    out_ << v;
    return *this;
  }
  void end() {
    out_ << '\n';
    first_ = true;
  }

 private:
  void sep() {
    if (!first_) out_ << ',';
    first_ = false;
  }
  std::ostream& out_;
  bool first_ = true;
};

void header(std::ostream& out, const std::vector<std::string>& cols) {
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
}

std::string order_label(ModelOrder order) {
  return std::to_string(order.p) + "," + std::to_string(order.q);
}

json num(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

json five_json(const FiveNumber& f) {
  return {{"min", num(f.min)},
          {"q25", num(f.q25)},
          {"median", num(f.median)},
          {"q75", num(f.q75)},
          {"max", num(f.max)}};
}

json method_json(const MethodResult& m) {
  return {{"theta", m.theta},
          {"omega", num(m.omega)},
          {"mpe", num(m.report.mpe)},
          {"mape", num(m.report.mape)},
          {"mae", num(m.report.mae)},
          {"qs", num(m.report.qs)},
          {"seconds", m.seconds},
          {"iterations", m.iterations},
          {"nonconverged", m.nonconverged}};
}

}  // namespace

std::vector<std::string> parameter_columns(ModelOrder order, bool with_omega) {
  std::vector<std::string> cols;
  if (with_omega) cols.emplace_back("omega");
  for (std::size_t i = 1; i <= order.p; ++i) cols.push_back("alpha" + std::to_string(i));
  for (std::size_t j = 1; j <= order.q; ++j) cols.push_back("beta" + std::to_string(j));
  return cols;
}

void write_simulation_csv(std::ostream& out, const SimOutput& sim) {
  header(out, {"t", "return", "true_vol2"});
  CsvRow row(out);
  for (std::size_t t = 0; t < sim.returns.size(); ++t) {
    row << t + 1 << sim.returns[t] << sim.true_vol2[t];
    row.end();
  }
}

void write_trajectory_csv(std::ostream& out, const StreamResult& result, ModelOrder order) {
  auto cols = parameter_columns(order, false);
  cols.insert(cols.begin(), "t");
  for (const char* c : {"gamma2", "omega", "variance", "next_variance"}) cols.emplace_back(c);
  header(out, cols);
  const Trajectory& traj = result.trajectory;
  CsvRow row(out);
  for (std::size_t t = 0; t < traj.size(); ++t) {
    row << t + 1;
    double total = 0.0;
    for (const double v : traj.row(t)) {
      row << v;
      total += v;
    }
    row << traj.gamma2[t] << traj.gamma2[t] * (1.0 - total) << result.predicted_variance[t]
        << traj.next_variance[t];
    row.end();
  }
}

void write_rolling_csv(std::ostream& out, const RollingResult& result, ModelOrder order,
                       Parameterization mode) {
  auto cols = parameter_columns(order, mode == Parameterization::full);
  cols.insert(cols.begin(), "t");
  cols.emplace_back("variance");
  header(out, cols);
  CsvRow row(out);
  for (std::size_t t = 0; t < result.variance.size(); ++t) {
    row << t + 1;
    for (const double v : result.row(t)) row << v;
    row << result.variance[t];
    row.end();
  }
}

void write_runs_csv(std::ostream& out, std::span<const RunResult> results) {
  header(out, {"run", "method", "mpe", "mape", "mae", "qs", "omega", "seconds"});
  CsvRow row(out);
  auto put = [&](std::size_t run, const std::string& method, const MethodResult& m) {
    row << run << method << m.report.mpe << m.report.mape << m.report.mae << m.report.qs
        << m.omega << m.seconds;
    row.end();
  };
  for (const auto& r : results) {
    put(r.run, "adavol", r.adavol);
    if (r.batch) put(r.run, "batch", *r.batch);
  }
}

void write_summary_csv(std::ostream& out, std::span<const MetricSummary> summary) {
  header(out, {"method", "metric", "min", "q25", "median", "q75", "max"});
  CsvRow row(out);
  for (const auto& s : summary) {
    row << s.method << s.metric << s.stats.min << s.stats.q25 << s.stats.median << s.stats.q75
        << s.stats.max;
    row.end();
  }
}

void write_bench_csv(std::ostream& out, std::span<const BenchRow> rows) {
  header(out, {"p", "q", "n", "adavol_seconds", "batch_seconds", "batch_fits", "adavol_ratio",
               "batch_ratio"});
  CsvRow row(out);
  for (const auto& b : rows) {
    row << b.order.p << b.order.q << b.n << b.adavol_seconds << b.batch_seconds << b.batch_fits
        << 1.0 << b.ratio();
    row.end();
  }
}

std::string params_json(const GarchParams& params) {
  return json{{"omega", params.omega}, {"alpha", params.alpha}, {"beta", params.beta}}.dump();
}

std::string simulation_manifest_json(const ExperimentSpec& spec,
                                     std::span<const std::string> files) {
  json runs = json::array();
  for (std::size_t r = 0; r < spec.runs; ++r) {
    runs.push_back({{"run", r},
                    {"seed", spec.sim_seed(r)},
                    {"params", json::parse(params_json(spec.truth_for(r)))},
                    {"file", r < files.size() ? files[r] : std::string()}});
  }
  json j = {{"order", order_label(spec.order)},
            {"n", spec.n},
            {"burn_in", spec.burn_in},
            {"seed", spec.seed},
            {"truth_policy", spec.truth_policy == ParamPolicy::fixed ? "fixed" : "random"},
            {"runs", runs}};
  return j.dump(2);
}

std::string experiment_json(const ExperimentSpec& spec, std::span<const RunResult> results,
                            std::span<const MetricSummary> summary) {
  json runs = json::array();
  for (const auto& r : results) {
    json entry = {{"run", r.run},
                  {"seed", r.sim_seed},
                  {"truth", json::parse(params_json(r.truth))},
                  {"init", json::parse(params_json(r.init))},
                  {"adavol", method_json(r.adavol)}};
    if (r.batch) entry["batch"] = method_json(*r.batch);
    runs.push_back(std::move(entry));
  }
  json agg = json::object();
  for (const auto& s : summary) agg[s.method][s.metric] = five_json(s.stats);
  json j = {{"order", order_label(spec.order)},
            {"n", spec.n},
            {"runs_requested", spec.runs},
            {"seed", spec.seed},
            {"eta", spec.adavol.eta},
            {"eps", spec.adavol.eps},
            {"increment", spec.schedule.increment},
            {"runs", runs},
            {"summary", agg}};
  return j.dump(2);
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace adavol
