#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "gapsafe/linalg.hpp"
#include "gapsafe/models.hpp"
#include "gapsafe/screening.hpp"

namespace gapsafe {

enum class ScreeningRule {
  None,
  /// One sphere around -G(0)/lambda_max, applied before the first epoch.
  Static,
  /// Gap sphere recomputed at every checkpoint.
  GapDynamic,
  /// Path only: a sequential EDPP+ sphere inflated by the previous gap
  /// radius seeds each solve, then GapDynamic takes over.
  SafeEdppSeeded,
  /// Path only: the original EDPP sphere built from an approximate previous
  /// dual point, with no further screening. Not safe; kept to reproduce its
  /// failures.
  UnsafeEdppRepro,
};

/// CLI spelling: none, static, gap, safe-edpp, unsafe-edpp.
std::string_view rule_name(ScreeningRule rule) noexcept;
ScreeningRule parse_rule(std::string_view name);

/// State handed to SolverConfig::on_checkpoint after each gap evaluation.
struct CheckpointView {
  std::size_t epoch;
  const DenseMatrix& B;
  /// Dual point rescaled with the dual norm over all p columns.
  const DenseMatrix& theta;
  double gap;
  /// Gap used for stopping (dual norm over active columns only).
  double stop_gap;
  double radius;
  const ActiveSet& active;
};

struct SolverConfig {
  double gap_tolerance = 1e-6;
  std::size_t max_epochs = 10000;
  std::size_t screen_every = 10;
  std::size_t zk_refresh_every = 100;
  ScreeningRule rule = ScreeningRule::GapDynamic;
  std::function<void(const CheckpointView&)> on_checkpoint;

  void validate() const;
};

struct SolveResult {
  DenseMatrix B;
  DenseMatrix theta;
  /// Stopping gap: the reduced problem's gap over the active columns.
  double gap = 0.0;
  /// Gap of the full problem at the returned B.
  double true_gap = 0.0;
  /// Gap radius certified at the returned (B, theta).
  double radius = 0.0;
  double primal = 0.0;
  std::size_t epochs_run = 0;
  std::vector<ScreeningEvent> events;
  ActiveSet active;
  bool converged = false;
};

/// (1 - tau/||v||)_+ v.
std::vector<double> group_soft_threshold(std::span<const double> v, double tau);

/// Exact minimizer of the j-th block of a quadratic loss, given
/// u_corr = B_j + x^(j)^T (Y - XB) / ||x^(j)||^2.
std::vector<double> block_update_quadratic(std::span<const double> B_j,
                                           std::span<const double> u_corr, double col_sq_norm,
                                           double lambda);

/// Proximal gradient step on block j with step 1/L_j, g_j = x^(j)^T G(XB).
std::vector<double> block_update_prox(std::span<const double> B_j, std::span<const double> g_j,
                                      double L_j, double lambda);

/// Cyclic block coordinate descent with duality-gap stopping and safe
/// screening every config.screen_every epochs.
///
/// A seed sphere, when given, is applied once before the first epoch
/// whatever the rule. Rows of the returned B at inactive features are
/// exactly zero.
SolveResult solve(const ProblemInstance& prob, const SolverConfig& config,
                  std::optional<DenseMatrix> warm_start = std::nullopt,
                  const std::optional<SafeSphere>& seed_sphere = std::nullopt);

}  // namespace gapsafe
