#include "gapsafe/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace gapsafe {

std::string_view rule_name(ScreeningRule rule) noexcept {
  switch (rule) {
    case ScreeningRule::None: return "none";
    case ScreeningRule::Static: return "static";
    case ScreeningRule::GapDynamic: return "gap";
    case ScreeningRule::SafeEdppSeeded: return "safe-edpp";
    case ScreeningRule::UnsafeEdppRepro: return "unsafe-edpp";
  }
  return "unknown";
}

ScreeningRule parse_rule(std::string_view name) {
  for (auto r : {ScreeningRule::None, ScreeningRule::Static, ScreeningRule::GapDynamic,
                 ScreeningRule::SafeEdppSeeded, ScreeningRule::UnsafeEdppRepro}) {
    if (rule_name(r) == name) return r;
  }
  throw ContractError("unknown screening rule '" + std::string(name) + "'");
}

void SolverConfig::validate() const {
  if (!(gap_tolerance > 0.0)) throw ContractError("gap tolerance must be positive");
  if (screen_every < 1) throw ContractError("screen_every must be at least 1");
  if (zk_refresh_every < 1) throw ContractError("zk_refresh_every must be at least 1");
}

std::vector<double> group_soft_threshold(std::span<const double> v, double tau) {
  if (tau < 0.0) throw ContractError("group_soft_threshold: tau must be nonnegative");
  std::vector<double> out(v.begin(), v.end());
  const double norm = l2_norm(v);
  if (norm <= tau || norm == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return out;
  }
  const double shrink = 1.0 - tau / norm;
  for (double& x : out) x *= shrink;
  return out;
}

std::vector<double> block_update_quadratic(std::span<const double> B_j,
                                           std::span<const double> u_corr, double col_sq_norm,
                                           double lambda) {
  if (!(col_sq_norm > 0.0)) throw ContractError("block_update_quadratic: zero column");
  if (B_j.size() != u_corr.size()) throw ContractError("block_update_quadratic: size mismatch");
  return group_soft_threshold(u_corr, lambda / col_sq_norm);
}

std::vector<double> block_update_prox(std::span<const double> B_j, std::span<const double> g_j,
                                      double L_j, double lambda) {
  if (!(L_j > 0.0)) throw ContractError("block_update_prox: L_j must be positive");
  if (B_j.size() != g_j.size()) throw ContractError("block_update_prox: size mismatch");
  std::vector<double> step(B_j.size());
  for (std::size_t k = 0; k < step.size(); ++k) step[k] = B_j[k] - g_j[k] / L_j;
  return group_soft_threshold(step, lambda / L_j);
}

namespace {

bool screens_dynamically(ScreeningRule rule) {
  return rule == ScreeningRule::GapDynamic || rule == ScreeningRule::SafeEdppSeeded;
}

class BlockCoordinateDescent {
 public:
  BlockCoordinateDescent(const ProblemInstance& prob, const SolverConfig& config)
      : prob_(prob),
        X_(prob.X()),
        model_(prob.model()),
        config_(config),
        q_(model_.q()),
        B_(X_.p(), q_),
        Z_(X_.n(), q_),
        active_(X_.p()),
        grad_(q_),
        corr_(q_),
        delta_(q_) {}

  SolveResult run(std::optional<DenseMatrix> warm_start, const std::optional<SafeSphere>& seed) {
    if (warm_start) {
      if (warm_start->rows() != X_.p() || warm_start->cols() != q_) {
        throw ContractError("solve: warm start must be p x q");
      }
      B_ = std::move(*warm_start);
    }

    for (std::size_t j = 0; j < X_.p(); ++j) {
      if (X_.col_sq_norm(j) == 0.0) pending_screened_ += deactivate(j);
    }
    if (seed) screen_with(*seed);
    if (config_.rule == ScreeningRule::Static) {
      screen_with(static_sphere(model_, X_, prob_.lambda()));
    }
    Z_ = X_.multiply(B_);

    SolveResult out;
    std::size_t epoch = 0;
    for (;;) {
      if (epoch % config_.screen_every == 0 || epoch == config_.max_epochs) {
        checkpoint(epoch, out);
        if (out.gap <= config_.gap_tolerance) {
          out.converged = true;
          break;
        }
        if (epoch >= config_.max_epochs) break;
      }
      run_epoch();
      ++epoch;
      if (epoch % config_.zk_refresh_every == 0) Z_ = X_.multiply(B_);
    }

    out.epochs_run = epoch;
    out.B = std::move(B_);
    out.active = std::move(active_);
    return out;
  }

 private:
  // Zeroes row j of B (keeping Z = XB) and removes j; returns 1 if j was active.
  std::size_t deactivate(std::size_t j) {
    if (!active_.deactivate(j)) return 0;
    if (!B_.row_is_zero(j)) {
      auto row = B_.row(j);
      for (std::size_t k = 0; k < q_; ++k) delta_[k] = -row[k];
      add_scaled_outer(Z_, X_, j, delta_);
      std::fill(row.begin(), row.end(), 0.0);
    }
    return 1;
  }

  void screen_with(const SafeSphere& sphere) {
    ActiveSet after = active_;
    apply_screen(X_, sphere, after);
    for (std::size_t j = 0; j < X_.p(); ++j) {
      if (active_.is_active(j) && !after.is_active(j)) pending_screened_ += deactivate(j);
    }
  }

  void run_epoch() {
    const double gamma = model_.gamma();
    const double lambda = prob_.lambda();
    const auto Y = model_.targets().values();
    for (std::size_t j = 0; j < X_.p(); ++j) {
      if (!active_.is_active(j)) continue;
      const double L = X_.col_sq_norm(j) / gamma;
      auto Bj = B_.row(j);

      if (q_ == 1 && model_.is_quadratic()) {
        double g = 0.0;
        auto zv = Z_.values();
        X_.for_each_in_col(j, [&](std::size_t i, double v) { g += v * (zv[i] - Y[i]); });
        const double u = Bj[0] - g / L;
        const double tau = lambda / L;
        const double updated = u > tau ? u - tau : (u < -tau ? u + tau : 0.0);
        delta_[0] = updated - Bj[0];
        if (delta_[0] != 0.0) {
          Bj[0] = updated;
          add_scaled_outer(Z_, X_, j, delta_);
        }
        continue;
      }

      std::fill(grad_.begin(), grad_.end(), 0.0);
      X_.for_each_in_col(j, [&](std::size_t i, double v) {
        model_.sample_gradient(i, Z_.row(i), corr_);
        for (std::size_t k = 0; k < q_; ++k) grad_[k] += v * corr_[k];
      });
      const auto updated = block_update_prox(Bj, grad_, L, lambda);
      bool changed = false;
      for (std::size_t k = 0; k < q_; ++k) {
        delta_[k] = updated[k] - Bj[k];
        changed = changed || delta_[k] != 0.0;
      }
      if (changed) {
        std::copy(updated.begin(), updated.end(), Bj.begin());
        add_scaled_outer(Z_, X_, j, delta_);
      }
    }
  }

  void checkpoint(std::size_t epoch, SolveResult& out) {
    const double lambda = prob_.lambda();
    const double gamma = model_.gamma();
    std::size_t screened_now = pending_screened_;
    pending_screened_ = 0;

    DenseMatrix R;
    std::vector<double> corr(X_.p());
    double scale_all = 0.0;
    double gap = 0.0;
    double radius = 0.0;
    double primal = 0.0;
    for (;;) {
      R = gradient_map(model_, Z_);
      for (double& v : R.values()) v = -v;
      double omega_all = 0.0;
      for (std::size_t j = 0; j < X_.p(); ++j) {
        X_.col_dot_mat_into(j, R, corr_);
        corr[j] = l2_norm(corr_);
        omega_all = std::max(omega_all, corr[j]);
      }
      scale_all = std::max(lambda, omega_all);
      theta_ = R;
      for (double& v : theta_.values()) v /= scale_all;
      primal = primal_value(prob_, B_, Z_);
      const double dual = dual_value(model_, theta_, lambda);
      gap = primal - dual;
      // P - D is only known up to rounding; a zero radius at the optimum
      // would drop support columns whose |x_j' theta| rounds below 1.
      const double noise =
          16.0 * std::numeric_limits<double>::epsilon() * (std::abs(primal) + std::abs(dual));
      radius = gap_radius(std::max(gap, noise), gamma, lambda);

      if (!screens_dynamically(config_.rule)) break;
      bool moved = false;
      for (std::size_t j = 0; j < X_.p(); ++j) {
        if (!active_.is_active(j)) continue;
        if (corr[j] / scale_all + radius * X_.col_norm(j) < 1.0) {
          moved = moved || !B_.row_is_zero(j);
          screened_now += deactivate(j);
        }
      }
      // Zeroing nonzero rows changed the iterate; re-evaluate at the new one.
      if (!moved) break;
    }

    double omega_active = 0.0;
    for (std::size_t j = 0; j < X_.p(); ++j)
      if (active_.is_active(j)) omega_active = std::max(omega_active, corr[j]);
    const double scale_active = std::max(lambda, omega_active);
    double stop_gap = gap;
    if (scale_active != scale_all) {
      DenseMatrix theta_active = R;
      for (double& v : theta_active.values()) v /= scale_active;
      stop_gap = primal - dual_value(model_, theta_active, lambda);
    }

    out.events.push_back({epoch, gap, radius, screened_now, active_.n_active()});
    out.gap = stop_gap;
    out.true_gap = gap;
    out.radius = radius;
    out.primal = primal;
    out.theta = theta_;
    if (config_.on_checkpoint) {
      config_.on_checkpoint(CheckpointView{epoch, B_, theta_, gap, stop_gap, radius, active_});
    }
  }

  const ProblemInstance& prob_;
  const DesignMatrix& X_;
  const ModelSpec& model_;
  const SolverConfig& config_;
  std::size_t q_;
  DenseMatrix B_;
  DenseMatrix Z_;
  DenseMatrix theta_;
  ActiveSet active_;
  std::vector<double> grad_;
  std::vector<double> corr_;
  std::vector<double> delta_;
  std::size_t pending_screened_ = 0;
};

}  // namespace

SolveResult solve(const ProblemInstance& prob, const SolverConfig& config,
                  std::optional<DenseMatrix> warm_start, const std::optional<SafeSphere>& seed_sphere) {
  config.validate();
  BlockCoordinateDescent bcd(prob, config);
  return bcd.run(std::move(warm_start), seed_sphere);
}

}  // namespace gapsafe
