#include "gapsafe/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include "gapsafe/dataset.hpp"

namespace gapsafe {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string data;
  std::string format = "auto";
  std::vector<std::size_t> label_columns{0};
  bool strict = false;
  SyntheticConfig synth;

  std::string model = "lasso";
  std::optional<double> lambda;
  std::optional<double> lambda_ratio;
  double eps = 1e-6;
  bool relative_eps = false;
  std::size_t screen_every = 10;
  std::size_t max_epochs = 10000;
  std::size_t refresh_every = 100;
  std::string rule = "gap";
  std::string unsafe_dual = "rescaled";

  std::size_t n_lambdas = 100;
  double delta = 3.0;
  std::vector<std::size_t> budgets{2, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048};

  std::vector<std::size_t> repro_grid_sizes{20, 50, 100};
  std::vector<double> repro_deltas{1.5, 2.0, 3.0};

  std::string out_dir = ".";
  bool no_timing = false;
};

void add_data_options(CLI::App& cmd, Options& o) {
  cmd.add_option("--data", o.data, "svmlight or CSV file (omit for synthetic data)");
  cmd.add_option("--format", o.format, "auto, svmlight or csv")
      ->check(CLI::IsMember({"auto", "svmlight", "csv"}));
  cmd.add_option("--label-column", o.label_columns,
                 "0-based CSV label column(s); several for the multi-task model")
      ->delimiter(',');
  cmd.add_flag("--strict", o.strict, "reject svmlight lines with unsorted indices");
  cmd.add_option("--n", o.synth.n, "synthetic: samples");
  cmd.add_option("--p", o.synth.p, "synthetic: features");
  cmd.add_option("--q", o.synth.q, "synthetic: tasks or classes");
  cmd.add_option("--informative", o.synth.n_informative, "synthetic: nonzero rows of the truth");
  cmd.add_option("--noise", o.synth.noise, "synthetic: noise level");
  cmd.add_option("--density", o.synth.density, "synthetic: fraction of nonzero entries");
  cmd.add_option("--seed", o.synth.seed, "synthetic: RNG seed");
  cmd.add_option("--model", o.model, "lasso, mtl, logreg or multinomial")
      ->check(CLI::IsMember({"lasso", "mtl", "logreg", "multinomial"}));
}

void add_solver_options(CLI::App& cmd, Options& o) {
  cmd.add_option("--eps", o.eps, "duality gap tolerance");
  cmd.add_flag("--relative-eps", o.relative_eps, "scale eps by max(1, P(0))");
  cmd.add_option("--screen-every", o.screen_every, "epochs between gap checkpoints");
  cmd.add_option("--max-epochs", o.max_epochs, "epoch limit per solve");
  cmd.add_option("--refresh-every", o.refresh_every, "epochs between recomputations of XB");
  cmd.add_option("--rule", o.rule, "none, static, gap, safe-edpp or unsafe-edpp")
      ->check(CLI::IsMember({"none", "static", "gap", "safe-edpp", "unsafe-edpp"}));
  cmd.add_option("--unsafe-dual", o.unsafe_dual,
                 "dual guess for unsafe-edpp: residual (r/lambda) or rescaled")
      ->check(CLI::IsMember({"residual", "rescaled"}));
  cmd.add_option("--out-dir", o.out_dir, "directory for reports");
  cmd.add_flag("--no-timing", o.no_timing, "omit wall-clock fields");
}

void add_path_options(CLI::App& cmd, Options& o) {
  cmd.add_option("--delta", o.delta, "grid spans lambda_max down to lambda_max * 10^-delta");
  cmd.add_option("--n-lambdas", o.n_lambdas, "grid points");
}

Dataset load_data(Options& o, ModelKind kind) {
  if (o.data.empty()) {
    o.synth.kind = kind;
    return make_synthetic(o.synth);
  }
  std::string fmt = o.format;
  if (fmt == "auto") fmt = fs::path(o.data).extension() == ".csv" ? "csv" : "svmlight";
  if (fmt == "csv") return load_csv_dense(o.data, o.label_columns);
  SvmlightOptions sv;
  sv.strict = o.strict;
  return load_svmlight(o.data, sv);
}

SolverConfig solver_config(const Options& o, const ModelSpec& model) {
  SolverConfig cfg;
  cfg.gap_tolerance = o.eps;
  if (o.relative_eps) {
    const DenseMatrix zero(model.n(), model.q());
    cfg.gap_tolerance = o.eps * std::max(1.0, loss_value(model, zero));
  }
  cfg.screen_every = o.screen_every;
  cfg.max_epochs = o.max_epochs;
  cfg.zk_refresh_every = o.refresh_every;
  cfg.rule = parse_rule(o.rule);
  return cfg;
}

PathConfig path_config(const Options& o, const ModelSpec& model) {
  PathConfig cfg;
  cfg.n_lambdas = o.n_lambdas;
  cfg.delta = o.delta;
  cfg.solver = solver_config(o, model);
  cfg.budgets = o.budgets;
  cfg.unsafe_dual = o.unsafe_dual == "residual" ? UnsafeDualApprox::ResidualOverLambda
                                                : UnsafeDualApprox::ResidualRescaled;
  return cfg;
}

Json config_json(const Options& o, const SolverConfig& s, const Dataset& d) {
  Json c;
  c["model"] = o.model;
  c["rule"] = std::string(rule_name(s.rule));
  c["eps"] = s.gap_tolerance;
  c["relative_eps"] = o.relative_eps;
  c["screen_every"] = s.screen_every;
  c["max_epochs"] = s.max_epochs;
  c["refresh_every"] = s.zk_refresh_every;
  c["source"] = d.source;
  c["format"] = d.format;
  c["n"] = d.X.n();
  c["p"] = d.X.p();
  if (o.data.empty()) {
    c["synthetic"] = {{"n", o.synth.n},         {"p", o.synth.p},
                      {"q", o.synth.q},         {"informative", o.synth.n_informative},
                      {"noise", o.synth.noise}, {"density", o.synth.density},
                      {"seed", o.synth.seed}};
  }
  return c;
}

Json matrix_json(const DenseMatrix& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return rows;
}

Json events_json(const std::vector<ScreeningEvent>& events) {
  Json arr = Json::array();
  for (const auto& e : events) {
    arr.push_back({{"epoch", e.epoch},
                   {"gap", e.gap},
                   {"radius", e.radius},
                   {"n_screened_new", e.n_screened_new},
                   {"n_active_after", e.n_active_after}});
  }
  return arr;
}

std::ofstream open_output(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream f(dir / name);
  if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
  return f;
}

int cmd_lambda_max(Options& o, std::ostream& out) {
  const auto kind = parse_model_kind(o.model);
  const Dataset d = load_data(o, kind);
  const ModelSpec model = make_model(kind, d.labels);
  out << format_real(lambda_max(model, d.X)) << '\n';
  return 0;
}

int cmd_solve(Options& o, std::ostream& out) {
  if (o.lambda.has_value() == o.lambda_ratio.has_value()) {
    throw UsageError("solve: give exactly one of --lambda and --lambda-ratio");
  }
  const auto kind = parse_model_kind(o.model);
  const Dataset d = load_data(o, kind);
  const ModelSpec model = make_model(kind, d.labels);
  const SolverConfig cfg = solver_config(o, model);
  const double lmax = lambda_max(model, d.X);
  const double lambda = o.lambda ? *o.lambda : *o.lambda_ratio * lmax;

  const auto start = std::chrono::steady_clock::now();
  const SolveResult res = solve(ProblemInstance(d.X, model, lambda), cfg);
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["command"] = "solve";
  j["config"] = config_json(o, cfg, d);
  j["lambda"] = lambda;
  j["lambda_max"] = lmax;
  j["gap"] = res.gap;
  j["true_gap"] = res.true_gap;
  j["radius"] = res.radius;
  j["primal"] = res.primal;
  j["converged"] = res.converged;
  j["epochs"] = res.epochs_run;
  j["n_active"] = res.active.n_active();
  if (!o.no_timing) j["wall_ms"] = ms;
  j["coefficients"] = matrix_json(res.B);
  j["events"] = events_json(res.events);

  open_output(o.out_dir, "solve.json") << j.dump(2) << '\n';
  out << "lambda=" << format_real(lambda) << " gap=" << format_real(res.gap)
      << " converged=" << (res.converged ? "true" : "false") << " n_active=" << res.active.n_active()
      << '\n';
  return 0;
}

int cmd_path(Options& o, std::ostream& out) {
  const auto kind = parse_model_kind(o.model);
  const Dataset d = load_data(o, kind);
  const ModelSpec model = make_model(kind, d.labels);
  const PathConfig cfg = path_config(o, model);
  const PathResult res = solve_path(d.X, model, cfg);

  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["command"] = "path";
  j["config"] = config_json(o, cfg.solver, d);
  j["config"]["n_lambdas"] = cfg.n_lambdas;
  j["config"]["delta"] = cfg.delta;
  j["lambda_max"] = res.lambdas.front();
  if (!o.no_timing) j["total_ms"] = res.total_ms;
  Json rows = Json::array();
  for (const auto& pt : res.points) {
    Json r{{"lambda", pt.lambda},       {"gap", pt.gap},
           {"true_gap", pt.true_gap},   {"epochs", pt.epochs},
           {"n_active", pt.n_active},   {"active_fraction", pt.active_fraction},
           {"converged", pt.converged}, {"edpp_degenerate", pt.edpp_degenerate},
           {"true_gap_violation", pt.true_gap_violation}};
    if (!o.no_timing) r["wall_ms"] = pt.wall_ms;
    r["events"] = events_json(pt.events);
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);

  open_output(o.out_dir, "path.json") << j.dump(2) << '\n';
  {
    auto f = open_output(o.out_dir, "path.csv");
    write_path_csv(res, f, !o.no_timing);
  }
  {
    auto f = open_output(o.out_dir, "trace.csv");
    write_trace_csv(res, f);
  }
  {
    auto f = open_output(o.out_dir, "coefficients.csv");
    write_coefficients_csv(res, f);
  }
  std::size_t failures = 0;
  std::size_t unconverged = 0;
  for (const auto& pt : res.points) {
    failures += pt.failed() ? 1 : 0;
    unconverged += pt.converged ? 0 : 1;
  }
  out << "points=" << res.points.size() << " unconverged=" << unconverged
      << " failures=" << failures << '\n';
  return 0;
}

int cmd_sweep(Options& o, std::ostream& out) {
  const auto kind = parse_model_kind(o.model);
  const Dataset d = load_data(o, kind);
  const ModelSpec model = make_model(kind, d.labels);
  const PathConfig cfg = path_config(o, model);
  const SweepTable table = active_fraction_sweep(d.X, model, cfg);
  auto f = open_output(o.out_dir, "sweep.csv");
  write_sweep_csv(table, f);
  out << "lambdas=" << table.lambdas.size() << " budgets=" << table.budgets.size() << '\n';
  return 0;
}

int cmd_repro(Options& o, std::ostream& out) {
  EdppReproConfig cfg;
  cfg.gap_tolerance = o.eps;
  cfg.grid_sizes = o.repro_grid_sizes;
  cfg.deltas = o.repro_deltas;
  cfg.max_epochs = o.max_epochs;
  cfg.screen_every = o.screen_every;
  const EdppReproResult res = reproduce_edpp_failure(cfg);
  const auto data = edpp_counterexample();

  {
    auto f = open_output(o.out_dir, "repro_edpp.csv");
    write_repro_csv(res, f);
  }
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["command"] = "repro-edpp";
  j["eps"] = cfg.gap_tolerance;
  j["dataset"] = {{"X", matrix_json(data.X.to_dense())}, {"y", data.y}};
  j["gap_dynamic_always_converged"] = res.gap_dynamic_always_converged;
  j["unsafe_failure_found"] = res.unsafe_failure_found;
  Json failures = Json::array();
  for (const auto& row : res.rows) {
    auto add = [&](const char* variant, const PathPoint& pt) {
      if (!pt.failed()) return;
      failures.push_back({{"n_lambdas", row.n_lambdas},
                          {"delta", row.delta},
                          {"t", row.t},
                          {"variant", variant},
                          {"edpp_degenerate", pt.edpp_degenerate},
                          {"true_gap", pt.true_gap}});
    };
    add("residual", row.unsafe_residual);
    add("rescaled", row.unsafe_rescaled);
  }
  j["failures"] = std::move(failures);
  open_output(o.out_dir, "repro_edpp.json") << j.dump(2) << '\n';

  out << "gap-safe reached eps at every point: "
      << (res.gap_dynamic_always_converged ? "yes" : "no") << '\n'
      << "unsafe EDPP failure observed: " << (res.unsafe_failure_found ? "yes" : "no") << '\n';
  return 0;
}

}  // namespace

void write_path_csv(const PathResult& result, std::ostream& out, bool timing) {
  out << "t,lambda,gap,true_gap,epochs," << (timing ? "wall_ms," : "")
      << "n_active,active_fraction,converged,edpp_degenerate,true_gap_violation\n";
  for (std::size_t t = 0; t < result.points.size(); ++t) {
    const auto& pt = result.points[t];
    out << t << ',' << format_real(pt.lambda) << ',' << format_real(pt.gap) << ','
        << format_real(pt.true_gap) << ',' << pt.epochs << ',';
    if (timing) out << format_real(pt.wall_ms) << ',';
    out << pt.n_active << ',' << format_real(pt.active_fraction) << ',' << int(pt.converged) << ','
        << int(pt.edpp_degenerate) << ',' << int(pt.true_gap_violation) << '\n';
  }
}

void write_trace_csv(const PathResult& result, std::ostream& out) {
  out << "t,lambda,epoch,gap,radius,n_screened_new,n_active_after\n";
  for (std::size_t t = 0; t < result.points.size(); ++t) {
    for (const auto& e : result.points[t].events) {
      out << t << ',' << format_real(result.points[t].lambda) << ',' << e.epoch << ','
          << format_real(e.gap) << ',' << format_real(e.radius) << ',' << e.n_screened_new << ','
          << e.n_active_after << '\n';
    }
  }
}

void write_coefficients_csv(const PathResult& result, std::ostream& out) {
  out << "t,lambda";
  if (!result.coefficients.empty()) {
    const auto& B = result.coefficients.front();
    for (std::size_t j = 0; j < B.rows(); ++j) {
      for (std::size_t k = 0; k < B.cols(); ++k) {
        out << ",b_" << j;
        if (B.cols() > 1) out << '_' << k;
      }
    }
  }
  out << '\n';
  for (std::size_t t = 0; t < result.coefficients.size(); ++t) {
    out << t << ',' << format_real(result.lambdas[t]);
    for (double v : result.coefficients[t].values()) out << ',' << format_real(v);
    out << '\n';
  }
}

void write_sweep_csv(const SweepTable& table, std::ostream& out) {
  out << "lambda";
  for (std::size_t b : table.budgets) out << ",K" << b;
  out << '\n';
  for (std::size_t t = 0; t < table.lambdas.size(); ++t) {
    out << format_real(table.lambdas[t]);
    for (const auto& row : table.fraction) out << ',' << format_real(row[t]);
    out << '\n';
  }
}

void write_repro_csv(const EdppReproResult& result, std::ostream& out) {
  out << "n_lambdas,delta,t,lambda,gap_safe_gap,gap_safe_converged,"
         "residual_gap,residual_true_gap,residual_degenerate,residual_failed,"
         "rescaled_gap,rescaled_true_gap,rescaled_degenerate,rescaled_failed\n";
  for (const auto& row : result.rows) {
    out << row.n_lambdas << ',' << format_real(row.delta) << ',' << row.t << ','
        << format_real(row.lambda) << ',' << format_real(row.gap_dynamic.gap) << ','
        << int(row.gap_dynamic.converged);
    for (const PathPoint* pt : {&row.unsafe_residual, &row.unsafe_rescaled}) {
      out << ',' << format_real(pt->gap) << ',' << format_real(pt->true_gap) << ','
          << int(pt->edpp_degenerate) << ',' << int(pt->failed());
    }
    out << '\n';
  }
}

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Sparse GLM solver with duality-gap safe screening", "gapsafe"};
  app.require_subcommand(1);

  auto* solve_cmd = app.add_subcommand("solve", "solve at a single lambda");
  add_data_options(*solve_cmd, o);
  add_solver_options(*solve_cmd, o);
  solve_cmd->add_option("--lambda", o.lambda, "regularization strength");
  solve_cmd->add_option("--lambda-ratio", o.lambda_ratio, "lambda as a fraction of lambda_max");

  auto* path_cmd = app.add_subcommand("path", "warm-started regularization path");
  add_data_options(*path_cmd, o);
  add_solver_options(*path_cmd, o);
  add_path_options(*path_cmd, o);

  auto* sweep_cmd = app.add_subcommand("sweep", "active fraction per lambda and epoch budget");
  add_data_options(*sweep_cmd, o);
  add_solver_options(*sweep_cmd, o);
  add_path_options(*sweep_cmd, o);
  sweep_cmd->add_option("--budget-list", o.budgets, "epoch budgets")->delimiter(',');

  auto* repro_cmd = app.add_subcommand("repro-edpp", "sequential EDPP counterexample");
  repro_cmd->add_option("--eps", o.eps, "duality gap tolerance");
  repro_cmd->add_option("--max-epochs", o.max_epochs, "epoch limit per solve");
  repro_cmd->add_option("--screen-every", o.screen_every, "epochs between gap checkpoints");
  repro_cmd->add_option("--grid-sizes", o.repro_grid_sizes, "path lengths T")->delimiter(',');
  repro_cmd->add_option("--deltas", o.repro_deltas, "grid spans")->delimiter(',');
  repro_cmd->add_option("--out-dir", o.out_dir, "directory for reports");

  auto* lmax_cmd = app.add_subcommand("lambda-max", "print lambda_max");
  add_data_options(*lmax_cmd, o);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  if (repro_cmd->parsed() && repro_cmd->count("--eps") == 0) o.eps = std::pow(10.0, -1.5);

  try {
    if (solve_cmd->parsed()) return cmd_solve(o, out);
    if (path_cmd->parsed()) return cmd_path(o, out);
    if (sweep_cmd->parsed()) return cmd_sweep(o, out);
    if (repro_cmd->parsed()) return cmd_repro(o, out);
    return cmd_lambda_max(o, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << '\n';
    return 1;
  } catch (const ContractError& e) {
    err << "invalid arguments: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace gapsafe
