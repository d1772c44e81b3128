#pragma once

#include <cstddef>
#include <vector>

#include "gapsafe/linalg.hpp"
#include "gapsafe/models.hpp"
#include "gapsafe/solver.hpp"

namespace gapsafe {

/// lambda_t = lambda_max 10^(-delta t / (T - 1)), t = 0..T-1.
std::vector<double> lambda_grid(double lambda_max, double delta, std::size_t T);

/// How the unsafe EDPP reproduction guesses the previous dual optimum from
/// the previous primal iterate beta (residual r = y - X beta).
enum class UnsafeDualApprox {
  /// theta = r / lambda_prev
  ResidualOverLambda,
  /// theta = r / max(lambda_prev, ||X^T r||_inf)
  ResidualRescaled,
};

struct PathConfig {
  std::size_t n_lambdas = 100;
  double delta = 3.0;
  SolverConfig solver;
  /// Epoch budgets for active_fraction_sweep.
  std::vector<std::size_t> budgets;
  UnsafeDualApprox unsafe_dual = UnsafeDualApprox::ResidualRescaled;
  bool keep_coefficients = true;

  void validate() const;
};

struct PathPoint {
  double lambda = 0.0;
  double gap = 0.0;
  double true_gap = 0.0;
  double radius = 0.0;
  std::size_t epochs = 0;
  double wall_ms = 0.0;
  std::size_t n_active = 0;
  double active_fraction = 0.0;
  bool converged = false;
  /// Features removed by the sequential seed sphere before the first epoch.
  std::size_t seed_screened = 0;
  /// The EDPP step length hit a zero denominator.
  bool edpp_degenerate = false;
  /// A safe EDPP seed was replaced by the gap sphere.
  bool seed_fallback = false;
  /// Final full-problem gap above the tolerance.
  bool true_gap_violation = false;
  std::vector<ScreeningEvent> events;

  bool failed() const noexcept { return edpp_degenerate || true_gap_violation; }
};

struct PathResult {
  std::vector<double> lambdas;
  std::vector<PathPoint> points;
  /// B per grid point (empty unless PathConfig::keep_coefficients).
  std::vector<DenseMatrix> coefficients;
  /// Dual point per grid point (kept alongside the coefficients).
  std::vector<DenseMatrix> thetas;
  double total_ms = 0.0;
};

/// Warm-started solves along the grid from lambda_max down.
PathResult solve_path(const DesignMatrix& X, const ModelSpec& model, const PathConfig& config);

struct SweepTable {
  std::vector<double> lambdas;
  std::vector<std::size_t> budgets;
  /// fraction[b][t]: share of features still active after budgets[b]
  /// epochs at lambdas[t].
  std::vector<std::vector<double>> fraction;
};

/// One path per epoch budget, each lambda limited to that many epochs.
SweepTable active_fraction_sweep(const DesignMatrix& X, const ModelSpec& model,
                                 const PathConfig& config);

// -- EDPP counterexample ----------------------------------------------------

struct EdppCounterexample {
  DesignMatrix X;
  std::vector<double> y;
};

/// 3 x 2 Lasso instance on which sequential EDPP fed with approximate dual
/// points discards an active feature.
EdppCounterexample edpp_counterexample();

struct EdppReproConfig {
  std::vector<std::size_t> grid_sizes{20, 50, 100};
  std::vector<double> deltas{1.5, 2.0, 3.0};
  double gap_tolerance = 0.031622776601683791;  // 10^-1.5
  std::size_t max_epochs = 10000;
  std::size_t screen_every = 10;
};

struct EdppReproRow {
  std::size_t n_lambdas = 0;
  double delta = 0.0;
  std::size_t t = 0;
  double lambda = 0.0;
  PathPoint gap_dynamic;
  PathPoint unsafe_residual;  // theta = r / lambda_prev
  PathPoint unsafe_rescaled;  // theta = r / max(lambda_prev, ||X^T r||_inf)
};

struct EdppReproResult {
  std::vector<EdppReproRow> rows;
  bool gap_dynamic_always_converged = true;
  bool unsafe_failure_found = false;
};

EdppReproResult reproduce_edpp_failure(const EdppReproConfig& config);

}  // namespace gapsafe
