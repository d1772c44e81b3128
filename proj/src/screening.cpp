#include "gapsafe/screening.hpp"

#include <algorithm>
#include <cmath>

namespace gapsafe {

namespace {

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void check_edpp_args(std::span<const double> theta, std::span<const double> y, double lambda_prev,
                     double lambda_next) {
  if (theta.size() != y.size()) throw ContractError("EDPP: theta and y lengths differ");
  if (!(lambda_next > 0.0) || lambda_next > lambda_prev) {
    throw ContractError("EDPP: need 0 < lambda_next <= lambda_prev");
  }
}

// y/l_prev - theta and y/l_next - theta.
struct EdppDirections {
  std::vector<double> prev;
  std::vector<double> next;
};

EdppDirections edpp_directions(std::span<const double> theta, std::span<const double> y,
                               double lambda_prev, double lambda_next) {
  EdppDirections d{std::vector<double>(y.size()), std::vector<double>(y.size())};
  for (std::size_t i = 0; i < y.size(); ++i) {
    d.prev[i] = y[i] / lambda_prev - theta[i];
    d.next[i] = y[i] / lambda_next - theta[i];
  }
  return d;
}

DenseMatrix shifted_center(std::span<const double> theta, std::span<const double> v, double t) {
  DenseMatrix c(theta.size(), 1);
  for (std::size_t i = 0; i < theta.size(); ++i) c(i, 0) = theta[i] + t * v[i];
  return c;
}

}  // namespace

std::vector<std::size_t> ActiveSet::active_indices() const {
  std::vector<std::size_t> idx;
  idx.reserve(n_active_);
  for (std::size_t j = 0; j < mask_.size(); ++j)
    if (mask_[j]) idx.push_back(j);
  return idx;
}

double gap_radius(double gap, double gamma, double lambda) {
  if (!(gamma > 0.0) || !(lambda > 0.0)) throw ContractError("gap_radius: gamma, lambda > 0");
  return std::sqrt(2.0 * std::max(gap, 0.0) / (gamma * lambda * lambda));
}

DualPoint dual_point_from_residual(const DenseMatrix& R, double lambda, const DesignMatrix& X) {
  if (R.rows() != X.n()) throw ContractError("dual_point_from_residual: R must have n rows");
  DualPoint out{R, dual_norm_omega_star(X, R)};
  const double scale = std::max(lambda, out.omega_star);
  for (double& v : out.theta.values()) v /= scale;
  return out;
}

bool sphere_test(const DesignMatrix& X, const SafeSphere& sphere, std::size_t j) {
  const auto corr = col_dot_mat(X, j, sphere.center);
  return l2_norm(corr) + sphere.radius * X.col_norm(j) < 1.0;
}

std::size_t apply_screen(const DesignMatrix& X, const SafeSphere& sphere, ActiveSet& active) {
  if (active.size() != X.p()) throw ContractError("apply_screen: active set must have p entries");
  if (sphere.center.rows() != X.n()) throw ContractError("apply_screen: center must have n rows");
  std::vector<double> buf(sphere.center.cols());
  std::size_t screened = 0;
  for (std::size_t j = 0; j < X.p(); ++j) {
    if (!active.is_active(j)) continue;
    X.col_dot_mat_into(j, sphere.center, buf);
    if (l2_norm(buf) + sphere.radius * X.col_norm(j) < 1.0) {
      active.deactivate(j);
      ++screened;
    }
  }
  return screened;
}

SafeSphere static_sphere(const ModelSpec& model, const DesignMatrix& X, double lambda) {
  const ProblemInstance prob(X, model, lambda);
  const DenseMatrix zero_z(model.n(), model.q());
  DenseMatrix center = gradient_map(model, zero_z);
  const double lmax = dual_norm_omega_star(X, center);
  if (lmax == 0.0) throw ContractError("static_sphere: lambda_max is zero");
  for (double& v : center.values()) v = -v / lmax;
  const DenseMatrix zero_b(X.p(), model.q());
  const double gap = duality_gap(prob, zero_b, zero_z, center);
  return {std::move(center), gap_radius(gap, model.gamma(), lambda)};
}

std::vector<std::size_t> equicorrelation_set(const DesignMatrix& X, const DenseMatrix& theta_ref,
                                             double tol) {
  const auto corr = column_correlations(X, theta_ref);
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < corr.size(); ++j)
    if (corr[j] >= 1.0 - tol) out.push_back(j);
  return out;
}

double edpp_alpha(std::span<const double> theta, std::span<const double> y, double lambda_prev,
                  double lambda_next) {
  check_edpp_args(theta, y, lambda_prev, lambda_next);
  const auto d = edpp_directions(theta, y, lambda_prev, lambda_next);
  const double denom = dot(d.prev, d.prev);
  if (denom == 0.0) {
    throw EdppDegenerateError("EDPP: y/lambda_prev - theta vanishes, alpha is undefined");
  }
  return std::max(0.0, dot(d.prev, d.next) / denom);
}

std::vector<double> edpp_v_perp(std::span<const double> theta, std::span<const double> y,
                                double lambda_prev, double lambda_next) {
  const double alpha = edpp_alpha(theta, y, lambda_prev, lambda_next);
  auto d = edpp_directions(theta, y, lambda_prev, lambda_next);
  for (std::size_t i = 0; i < y.size(); ++i) d.next[i] -= alpha * d.prev[i];
  return std::move(d.next);
}

SafeSphere edpp_unsafe_sphere(std::span<const double> theta_prev, std::span<const double> y,
                              double lambda_prev, double lambda_next) {
  const auto v = edpp_v_perp(theta_prev, y, lambda_prev, lambda_next);
  return {shifted_center(theta_prev, v, 0.5), 0.5 * l2_norm(v)};
}

SafeSphere edpp_sphere_from_lambda_max(const DesignMatrix& X, std::span<const double> y,
                                       double lambda_max, double lambda_next) {
  if (y.size() != X.n()) throw ContractError("EDPP: y must have n entries");
  if (!(lambda_next > 0.0) || lambda_next > lambda_max) {
    throw ContractError("EDPP: need 0 < lambda_next <= lambda_max");
  }
  const DenseMatrix ycol = DenseMatrix::column(y);
  std::size_t best = 0;
  double best_corr = -1.0;
  for (std::size_t j = 0; j < X.p(); ++j) {
    const double c = std::abs(col_dot_mat(X, j, ycol)[0]);
    if (c > best_corr) {
      best_corr = c;
      best = j;
    }
  }
  const double sign = col_dot_mat(X, best, ycol)[0] >= 0.0 ? 1.0 : -1.0;
  std::vector<double> v1(y.size(), 0.0);
  X.for_each_in_col(best, [&](std::size_t i, double v) { v1[i] = sign * v; });
  const double v1_sq = dot(v1, v1);
  if (v1_sq == 0.0) throw EdppDegenerateError("EDPP: lambda_max feature is a zero column");

  std::vector<double> theta0(y.size());
  std::vector<double> v(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    theta0[i] = y[i] / lambda_max;
    v[i] = y[i] / lambda_next - theta0[i];
  }
  const double alpha = std::max(0.0, dot(v1, v) / v1_sq);
  for (std::size_t i = 0; i < y.size(); ++i) v[i] -= alpha * v1[i];
  return {shifted_center(theta0, v, 0.5), 0.5 * l2_norm(v)};
}

SafeSphere safe_edpp_simple_sphere(std::span<const double> theta, double r_prev,
                                   std::span<const double> y, double lambda_prev,
                                   double lambda_next) {
  if (r_prev < 0.0) throw ContractError("EDPP: r_prev must be nonnegative");
  const double alpha = edpp_alpha(theta, y, lambda_prev, lambda_next);
  const auto v = edpp_v_perp(theta, y, lambda_prev, lambda_next);
  const double radius = r_prev * (1.0 + std::abs(1.0 - alpha)) + l2_norm(v);
  return {shifted_center(theta, v, 0.0), radius};
}

SafeSphere safe_edpp_plus_sphere(std::span<const double> theta, double r_prev,
                                 std::span<const double> y, double lambda_prev,
                                 double lambda_next) {
  if (r_prev < 0.0) throw ContractError("EDPP: r_prev must be nonnegative");
  const double alpha = edpp_alpha(theta, y, lambda_prev, lambda_next);
  const auto v = edpp_v_perp(theta, y, lambda_prev, lambda_next);
  const auto d = edpp_directions(theta, y, lambda_prev, lambda_next);
  const double prev_norm = l2_norm(d.prev);

  double step = 0.0;  // ||y/l_next - y/l_prev||
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double s = y[i] / lambda_next - y[i] / lambda_prev;
    step += s * s;
  }
  step = std::sqrt(step);

  const double radius = 0.5 * (std::abs(1.0 - alpha) + 1.0 + alpha) * r_prev + 0.5 * l2_norm(v) +
                        step * r_prev / (2.0 * prev_norm * prev_norm) *
                            (3.0 * prev_norm + 2.0 * r_prev);
  return {shifted_center(theta, v, 0.5), radius};
}

}  // namespace gapsafe
