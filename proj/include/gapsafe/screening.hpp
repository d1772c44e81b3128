#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gapsafe/linalg.hpp"
#include "gapsafe/models.hpp"

namespace gapsafe {

/// Ball B(center, radius) in dual space, certified by its producer to
/// contain the dual optimum.
struct SafeSphere {
  DenseMatrix center;
  double radius = 0.0;
};

/// Features still in play. Entries only ever go from active to inactive.
class ActiveSet {
 public:
  ActiveSet() = default;
  explicit ActiveSet(std::size_t p) : mask_(p, 1), n_active_(p) {}

  std::size_t size() const noexcept { return mask_.size(); }
  std::size_t n_active() const noexcept { return n_active_; }
  bool is_active(std::size_t j) const noexcept { return mask_[j] != 0; }
  std::span<const std::uint8_t> mask() const noexcept { return mask_; }

  /// Returns true if j was active.
  bool deactivate(std::size_t j) noexcept {
    if (!mask_[j]) return false;
    mask_[j] = 0;
    --n_active_;
    return true;
  }

  std::vector<std::size_t> active_indices() const;

 private:
  std::vector<std::uint8_t> mask_;
  std::size_t n_active_ = 0;
};

struct ScreeningEvent {
  std::size_t epoch = 0;
  double gap = 0.0;
  double radius = 0.0;
  std::size_t n_screened_new = 0;
  std::size_t n_active_after = 0;
};

/// sqrt(2 gap / (gamma lambda^2)); negative gaps from roundoff count as 0.
double gap_radius(double gap, double gamma, double lambda);

struct DualPoint {
  DenseMatrix theta;
  double omega_star = 0.0;
};

/// Rescales a residual R = -G(XB) into the dual feasible set:
/// Theta = R / max(lambda, Omega_*(X^T R)) with the dual norm over all p
/// columns.
DualPoint dual_point_from_residual(const DenseMatrix& R, double lambda, const DesignMatrix& X);

/// ||x^(j)^T c||_2 + r ||x^(j)||_2 < 1.
bool sphere_test(const DesignMatrix& X, const SafeSphere& sphere, std::size_t j);

/// Deactivates every active j passing sphere_test; returns how many.
std::size_t apply_screen(const DesignMatrix& X, const SafeSphere& sphere, ActiveSet& active);

/// Sphere centered at -G(0)/lambda_max with the gap radius evaluated at B = 0.
SafeSphere static_sphere(const ModelSpec& model, const DesignMatrix& X, double lambda);

/// {j : ||x^(j)^T Theta_ref||_2 >= 1 - tol}, ascending.
std::vector<std::size_t> equicorrelation_set(const DesignMatrix& X, const DenseMatrix& theta_ref,
                                             double tol);

// Sequential EDPP spheres (single-target Lasso only). `theta` and `y` are
// length-n vectors; lambda_next <= lambda_prev.

/// (<y/l_prev - theta, y/l_next - theta> / ||y/l_prev - theta||^2)_+.
/// Throws EdppDegenerateError when y/l_prev - theta = 0.
double edpp_alpha(std::span<const double> theta, std::span<const double> y, double lambda_prev,
                  double lambda_next);

/// y/l_next - theta - alpha[theta] (y/l_prev - theta).
std::vector<double> edpp_v_perp(std::span<const double> theta, std::span<const double> y,
                                double lambda_prev, double lambda_next);

/// The original EDPP ball B(theta + v/2, ||v||/2), which contains the new
/// dual optimum only when theta is exactly the previous one.
SafeSphere edpp_unsafe_sphere(std::span<const double> theta_prev, std::span<const double> y,
                              double lambda_prev, double lambda_next);

/// EDPP ball for the first step below lambda_max, where y/lambda_max is the
/// exact dual optimum and the reference direction is the normal
/// sign(x_*^T y) x_* of the most correlated feature x_*.
SafeSphere edpp_sphere_from_lambda_max(const DesignMatrix& X, std::span<const double> y,
                                       double lambda_max, double lambda_next);

/// B(theta, r_prev (1 + |1 - alpha|) + ||v_perp||) for a feasible theta with
/// ||theta_hat(l_prev) - theta|| <= r_prev.
SafeSphere safe_edpp_simple_sphere(std::span<const double> theta, double r_prev,
                                   std::span<const double> y, double lambda_prev,
                                   double lambda_next);

/// Ball centered at theta + v_perp/2 with the inflated radius
///   (|1-a| + 1 + a)/2 r + ||v_perp||/2
///   + ||y/l_next - y/l_prev|| r (3 ||y/l_prev - theta|| + 2 r) / (2 ||y/l_prev - theta||^2).
SafeSphere safe_edpp_plus_sphere(std::span<const double> theta, double r_prev,
                                 std::span<const double> y, double lambda_prev,
                                 double lambda_next);

}  // namespace gapsafe
