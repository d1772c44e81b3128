#include "gapsafe/path.hpp"

#include <chrono>
#include <cmath>
#include <optional>

namespace gapsafe {

std::vector<double> lambda_grid(double lambda_max, double delta, std::size_t T) {
  if (T < 2) throw ContractError("lambda_grid: need at least two grid points");
  if (!(lambda_max > 0.0)) throw ContractError("lambda_grid: lambda_max must be positive");
  if (!(delta > 0.0)) throw ContractError("lambda_grid: delta must be positive");
  std::vector<double> grid(T);
  grid[0] = lambda_max;
  for (std::size_t t = 1; t < T; ++t) {
    const double expo = -delta * static_cast<double>(t) / static_cast<double>(T - 1);
    grid[t] = lambda_max * std::pow(10.0, expo);
  }
  return grid;
}

void PathConfig::validate() const {
  if (n_lambdas < 2) throw ContractError("path: need at least two grid points");
  if (!(delta > 0.0)) throw ContractError("path: delta must be positive");
  solver.validate();
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

bool is_edpp_rule(ScreeningRule rule) {
  return rule == ScreeningRule::SafeEdppSeeded || rule == ScreeningRule::UnsafeEdppRepro;
}

std::vector<double> approximate_dual(const DesignMatrix& X, std::span<const double> y,
                                     const DenseMatrix& beta, double lambda_prev,
                                     UnsafeDualApprox approx) {
  const DenseMatrix Xb = X.multiply(beta);
  DenseMatrix r(y.size(), 1);
  for (std::size_t i = 0; i < y.size(); ++i) r(i, 0) = y[i] - Xb(i, 0);
  double scale = lambda_prev;
  if (approx == UnsafeDualApprox::ResidualRescaled) {
    scale = std::max(lambda_prev, dual_norm_omega_star(X, r));
  }
  std::vector<double> theta(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) theta[i] = r(i, 0) / scale;
  return theta;
}

}  // namespace

PathResult solve_path(const DesignMatrix& X, const ModelSpec& model, const PathConfig& config) {
  config.validate();
  const double lmax = lambda_max(model, X);
  if (!(lmax > 0.0)) {
    throw ContractError("path: lambda_max is zero, B = 0 is optimal for every lambda");
  }
  const bool edpp_applies = model.kind() == ModelKind::Lasso;
  if (config.solver.rule == ScreeningRule::UnsafeEdppRepro && !edpp_applies) {
    throw ContractError("path: the unsafe EDPP reproduction is defined for the Lasso only");
  }

  PathResult out;
  out.lambdas = lambda_grid(lmax, config.delta, config.n_lambdas);
  const auto y = model.targets().values();
  const auto path_start = Clock::now();

  DenseMatrix B_prev(X.p(), model.q());
  DenseMatrix theta_prev;
  double radius_prev = 0.0;

  for (std::size_t t = 0; t < out.lambdas.size(); ++t) {
    const double lambda = out.lambdas[t];
    const auto start = Clock::now();
    PathPoint point;
    point.lambda = lambda;

    std::optional<SafeSphere> seed;
    if (t >= 1 && edpp_applies && is_edpp_rule(config.solver.rule)) {
      const double lambda_prev = out.lambdas[t - 1];
      try {
        if (t == 1) {
          seed = edpp_sphere_from_lambda_max(X, y, lambda_prev, lambda);
        } else if (config.solver.rule == ScreeningRule::SafeEdppSeeded) {
          seed = safe_edpp_plus_sphere(theta_prev.values(), radius_prev, y, lambda_prev, lambda);
        } else {
          const auto theta = approximate_dual(X, y, B_prev, lambda_prev, config.unsafe_dual);
          seed = edpp_unsafe_sphere(theta, y, lambda_prev, lambda);
        }
      } catch (const EdppDegenerateError&) {
        // Safe variant: the warm-started gap sphere at the first checkpoint
        // takes over. Unsafe variant: recorded, and the point runs unscreened.
        point.edpp_degenerate = true;
        point.seed_fallback = config.solver.rule == ScreeningRule::SafeEdppSeeded;
      }
    }

    const ProblemInstance prob(X, model, lambda);
    SolveResult res = solve(prob, config.solver, B_prev, seed);

    point.gap = res.gap;
    point.true_gap = res.true_gap;
    point.radius = res.radius;
    point.epochs = res.epochs_run;
    point.n_active = res.active.n_active();
    point.active_fraction =
        X.p() == 0 ? 0.0 : static_cast<double>(point.n_active) / static_cast<double>(X.p());
    point.converged = res.converged;
    point.true_gap_violation = res.true_gap > config.solver.gap_tolerance;
    if (!res.events.empty() && seed) point.seed_screened = res.events.front().n_screened_new;
    point.events = std::move(res.events);
    point.wall_ms = elapsed_ms(start);

    B_prev = res.B;
    theta_prev = res.theta;
    radius_prev = res.radius;
    if (config.keep_coefficients) {
      out.coefficients.push_back(std::move(res.B));
      out.thetas.push_back(std::move(res.theta));
    }
    out.points.push_back(std::move(point));
  }
  out.total_ms = elapsed_ms(path_start);
  return out;
}

SweepTable active_fraction_sweep(const DesignMatrix& X, const ModelSpec& model,
                                 const PathConfig& config) {
  if (config.budgets.empty()) throw ContractError("sweep: no epoch budgets given");
  SweepTable table;
  table.budgets = config.budgets;
  for (std::size_t budget : config.budgets) {
    PathConfig cfg = config;
    cfg.solver.max_epochs = budget;
    cfg.keep_coefficients = false;
    const PathResult res = solve_path(X, model, cfg);
    if (table.lambdas.empty()) table.lambdas = res.lambdas;
    std::vector<double> row;
    row.reserve(res.points.size());
    for (const auto& pt : res.points) row.push_back(pt.active_fraction);
    table.fraction.push_back(std::move(row));
  }
  return table;
}

// ---------------------------------------------------------------------------

EdppCounterexample edpp_counterexample() {
  const double s2 = std::sqrt(2.0);
  const double s3 = std::sqrt(3.0);
  const double s6 = std::sqrt(6.0);
  const std::vector<double> rows{
      1.0 / s2,  s2 / s3,    //
      0.0,       -1.0 / s6,  //
      -1.0 / s2, -1.0 / s6,
  };
  return {DesignMatrix::dense_row_major(3, 2, rows), {1.0 / s6, 1.0 / s6, -s2 / s3}};
}

EdppReproResult reproduce_edpp_failure(const EdppReproConfig& config) {
  const auto data = edpp_counterexample();
  const ModelSpec model = ModelSpec::lasso(data.y);

  EdppReproResult out;
  for (std::size_t T : config.grid_sizes) {
    for (double delta : config.deltas) {
      PathConfig base;
      base.n_lambdas = T;
      base.delta = delta;
      base.solver.gap_tolerance = config.gap_tolerance;
      base.solver.max_epochs = config.max_epochs;
      base.solver.screen_every = config.screen_every;
      base.keep_coefficients = false;

      PathConfig dyn = base;
      dyn.solver.rule = ScreeningRule::GapDynamic;
      PathConfig unsafe_a = base;
      unsafe_a.solver.rule = ScreeningRule::UnsafeEdppRepro;
      unsafe_a.unsafe_dual = UnsafeDualApprox::ResidualOverLambda;
      PathConfig unsafe_b = unsafe_a;
      unsafe_b.unsafe_dual = UnsafeDualApprox::ResidualRescaled;

      const auto r_dyn = solve_path(data.X, model, dyn);
      const auto r_a = solve_path(data.X, model, unsafe_a);
      const auto r_b = solve_path(data.X, model, unsafe_b);

      for (std::size_t t = 0; t < T; ++t) {
        EdppReproRow row{T, delta, t, r_dyn.lambdas[t], r_dyn.points[t], r_a.points[t],
                         r_b.points[t]};
        if (!row.gap_dynamic.converged || row.gap_dynamic.true_gap > config.gap_tolerance) {
          out.gap_dynamic_always_converged = false;
        }
        if (row.unsafe_residual.failed() || row.unsafe_rescaled.failed()) {
          out.unsafe_failure_found = true;
        }
        out.rows.push_back(std::move(row));
      }
    }
  }
  return out;
}

}  // namespace gapsafe
