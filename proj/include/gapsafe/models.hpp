#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "gapsafe/linalg.hpp"

namespace gapsafe {

enum class ModelKind { Lasso, MultiTaskLasso, Logistic, Multinomial };

/// CLI spelling: lasso, mtl, logreg, multinomial.
std::string_view model_name(ModelKind kind) noexcept;
ModelKind parse_model_kind(std::string_view name);

/// One of the four separable losses sum_i f_i(x_i^T B) together with its
/// targets Y (n x q).
///
/// Quadratic models use f_i(z) = ||Y_i - z||^2 / 2, the logistic model
/// f_i(z) = log(1 + e^z) - y_i z with y_i in {0, 1}, and the multinomial
/// model f_i(z) = logsumexp(z) - <Y_i, z> with one-hot rows Y_i.
/// gamma() is the strong convexity modulus of every f_i^* (the gradients of
/// f_i are 1/gamma-Lipschitz).
///
/// An intercept is not modeled. Append a constant column to X to fit one;
/// it is then penalized like any other feature, which matters little when
/// the constant is large.
class ModelSpec {
 public:
  ModelSpec(ModelKind kind, DenseMatrix targets);

  static ModelSpec lasso(std::span<const double> y);
  static ModelSpec multi_task(DenseMatrix Y);
  static ModelSpec logistic(std::span<const double> y);
  static ModelSpec multinomial(DenseMatrix one_hot);
  /// Class labels in {1, ..., q}; every class must occur.
  static ModelSpec multinomial_from_classes(std::span<const int> classes);

  ModelKind kind() const noexcept { return kind_; }
  const DenseMatrix& targets() const noexcept { return Y_; }
  std::size_t n() const noexcept { return Y_.rows(); }
  std::size_t q() const noexcept { return Y_.cols(); }
  double gamma() const noexcept;
  bool is_quadratic() const noexcept {
    return kind_ == ModelKind::Lasso || kind_ == ModelKind::MultiTaskLasso;
  }

  double sample_loss(std::size_t i, std::span<const double> z) const;
  /// f_i^*(u); +infinity outside the conjugate's domain.
  double sample_conjugate(std::size_t i, std::span<const double> u) const;
  void sample_gradient(std::size_t i, std::span<const double> z, std::span<double> out) const;

 private:
  ModelKind kind_;
  DenseMatrix Y_;
};

/// Problem (X, loss, lambda). Holds references; X and the model must outlive it.
class ProblemInstance {
 public:
  ProblemInstance(const DesignMatrix& X, const ModelSpec& model, double lambda);

  const DesignMatrix& X() const noexcept { return *X_; }
  const ModelSpec& model() const noexcept { return *model_; }
  double lambda() const noexcept { return lambda_; }

 private:
  const DesignMatrix* X_;
  const ModelSpec* model_;
  double lambda_;
};

/// Tolerance used to absorb roundoff before rejecting points from the
/// entropy domains ([0,1] and the simplex).
inline constexpr double kDomainTolerance = 1e-12;

/// Binary negative entropy x log x + (1-x) log(1-x); +inf outside [0,1].
double binary_neg_entropy(double x) noexcept;
/// sum_k x_k log x_k on the simplex; +inf outside.
double neg_entropy(std::span<const double> x) noexcept;

double loss_value(const ModelSpec& model, const DenseMatrix& Z);
double conjugate_value(const ModelSpec& model, std::size_t i, std::span<const double> u);
DenseMatrix gradient_map(const ModelSpec& model, const DenseMatrix& Z);
double lambda_max(const ModelSpec& model, const DesignMatrix& X);

/// Omega(B) = sum_j ||B_j,:||_2.
double group_norm_sum(const DenseMatrix& B);
double primal_value(const ProblemInstance& prob, const DenseMatrix& B, const DenseMatrix& Z);
/// D_lambda(Theta) = -sum_i f_i^*(-lambda Theta_i,:); -inf outside the domain.
double dual_value(const ModelSpec& model, const DenseMatrix& Theta, double lambda);
double duality_gap(const ProblemInstance& prob, const DenseMatrix& B, const DenseMatrix& Z,
                   const DenseMatrix& Theta);

/// max_j ||x^(j)^T M||_2, restricted to j with mask[j] != 0 when a mask is given.
double dual_norm_omega_star(const DesignMatrix& X, const DenseMatrix& M,
                            std::optional<std::span<const std::uint8_t>> mask = std::nullopt);

/// Row norms ||x^(j)^T M||_2 for every column j.
std::vector<double> column_correlations(const DesignMatrix& X, const DenseMatrix& M);

}  // namespace gapsafe
