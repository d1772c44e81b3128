#include "gapsafe/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace gapsafe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double softplus(double z) noexcept {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double log_sum_exp(std::span<const double> z) noexcept {
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - m);
  return m + std::log(s);
}

double xlogx(double x) noexcept { return x > 0.0 ? x * std::log(x) : 0.0; }

void check_binary(std::span<const double> y) {
  for (double v : y) {
    if (v != 0.0 && v != 1.0) throw ContractError("logistic targets must be 0 or 1");
  }
}

void check_one_hot(const DenseMatrix& Y) {
  for (std::size_t i = 0; i < Y.rows(); ++i) {
    std::size_t ones = 0;
    for (double v : Y.row(i)) {
      if (v == 1.0) {
        ++ones;
      } else if (v != 0.0) {
        throw ContractError("multinomial targets must be one-hot (row " + std::to_string(i) + ")");
      }
    }
    if (ones != 1) {
      throw ContractError("multinomial targets must be one-hot (row " + std::to_string(i) + ")");
    }
  }
}

}  // namespace

std::string_view model_name(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::Lasso: return "lasso";
    case ModelKind::MultiTaskLasso: return "mtl";
    case ModelKind::Logistic: return "logreg";
    case ModelKind::Multinomial: return "multinomial";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "lasso") return ModelKind::Lasso;
  if (name == "mtl") return ModelKind::MultiTaskLasso;
  if (name == "logreg") return ModelKind::Logistic;
  if (name == "multinomial") return ModelKind::Multinomial;
  throw ContractError("unknown model '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------

ModelSpec::ModelSpec(ModelKind kind, DenseMatrix targets) : kind_(kind), Y_(std::move(targets)) {
  if (Y_.rows() == 0 || Y_.cols() == 0) throw ContractError("ModelSpec: empty targets");
  switch (kind_) {
    case ModelKind::Lasso:
      if (Y_.cols() != 1) throw ContractError("lasso expects a single target column");
      break;
    case ModelKind::MultiTaskLasso:
      break;
    case ModelKind::Logistic:
      if (Y_.cols() != 1) throw ContractError("logistic expects a single target column");
      check_binary(Y_.values());
      break;
    case ModelKind::Multinomial:
      check_one_hot(Y_);
      break;
  }
  for (double v : Y_.values()) {
    if (!std::isfinite(v)) throw ContractError("ModelSpec: non-finite target");
  }
}

ModelSpec ModelSpec::lasso(std::span<const double> y) {
  return ModelSpec(ModelKind::Lasso, DenseMatrix::column(y));
}

ModelSpec ModelSpec::multi_task(DenseMatrix Y) {
  return ModelSpec(ModelKind::MultiTaskLasso, std::move(Y));
}

ModelSpec ModelSpec::logistic(std::span<const double> y) {
  return ModelSpec(ModelKind::Logistic, DenseMatrix::column(y));
}

ModelSpec ModelSpec::multinomial(DenseMatrix one_hot) {
  return ModelSpec(ModelKind::Multinomial, std::move(one_hot));
}

ModelSpec ModelSpec::multinomial_from_classes(std::span<const int> classes) {
  if (classes.empty()) throw ContractError("multinomial: no samples");
  const int q = *std::max_element(classes.begin(), classes.end());
  if (*std::min_element(classes.begin(), classes.end()) < 1) {
    throw ContractError("multinomial: class labels start at 1");
  }
  std::vector<bool> seen(static_cast<std::size_t>(q), false);
  DenseMatrix Y(classes.size(), static_cast<std::size_t>(q));
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const auto k = static_cast<std::size_t>(classes[i] - 1);
    Y(i, k) = 1.0;
    seen[k] = true;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw ContractError("multinomial: class labels must be contiguous from 1");
  }
  return multinomial(std::move(Y));
}

double ModelSpec::gamma() const noexcept { return kind_ == ModelKind::Logistic ? 4.0 : 1.0; }

double ModelSpec::sample_loss(std::size_t i, std::span<const double> z) const {
  auto y = Y_.row(i);
  switch (kind_) {
    case ModelKind::Lasso:
    case ModelKind::MultiTaskLasso: {
      double s = 0.0;
      for (std::size_t k = 0; k < z.size(); ++k) s += (y[k] - z[k]) * (y[k] - z[k]);
      return 0.5 * s;
    }
    case ModelKind::Logistic:
      return softplus(z[0]) - y[0] * z[0];
    case ModelKind::Multinomial: {
      double lin = 0.0;
      for (std::size_t k = 0; k < z.size(); ++k) lin += y[k] * z[k];
      return log_sum_exp(z) - lin;
    }
  }
  return 0.0;
}

double ModelSpec::sample_conjugate(std::size_t i, std::span<const double> u) const {
  auto y = Y_.row(i);
  switch (kind_) {
    case ModelKind::Lasso:
    case ModelKind::MultiTaskLasso: {
      // sup_z <z,u> - ||y - z||^2/2 is attained at z = y + u.
      double s = 0.0;
      for (std::size_t k = 0; k < u.size(); ++k) s += 0.5 * u[k] * u[k] + y[k] * u[k];
      return s;
    }
    case ModelKind::Logistic:
      return binary_neg_entropy(u[0] + y[0]);
    case ModelKind::Multinomial: {
      std::vector<double> x(u.size());
      for (std::size_t k = 0; k < u.size(); ++k) x[k] = u[k] + y[k];
      return neg_entropy(x);
    }
  }
  return kInf;
}

void ModelSpec::sample_gradient(std::size_t i, std::span<const double> z,
                                std::span<double> out) const {
  auto y = Y_.row(i);
  switch (kind_) {
    case ModelKind::Lasso:
    case ModelKind::MultiTaskLasso:
      for (std::size_t k = 0; k < z.size(); ++k) out[k] = z[k] - y[k];
      return;
    case ModelKind::Logistic:
      out[0] = sigmoid(z[0]) - y[0];
      return;
    case ModelKind::Multinomial: {
      const double m = *std::max_element(z.begin(), z.end());
      double s = 0.0;
      for (std::size_t k = 0; k < z.size(); ++k) {
        out[k] = std::exp(z[k] - m);
        s += out[k];
      }
      for (std::size_t k = 0; k < z.size(); ++k) out[k] = out[k] / s - y[k];
      return;
    }
  }
}

// ---------------------------------------------------------------------------

ProblemInstance::ProblemInstance(const DesignMatrix& X, const ModelSpec& model, double lambda)
    : X_(&X), model_(&model), lambda_(lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ContractError("lambda must be positive and finite");
  }
  if (X.n() != model.n()) {
    throw ContractError("design matrix has " + std::to_string(X.n()) + " rows but targets have " +
                        std::to_string(model.n()));
  }
}

// ---------------------------------------------------------------------------

double binary_neg_entropy(double x) noexcept {
  if (x < -kDomainTolerance || x > 1.0 + kDomainTolerance || std::isnan(x)) return kInf;
  x = std::clamp(x, 0.0, 1.0);
  return xlogx(x) + xlogx(1.0 - x);
}

double neg_entropy(std::span<const double> x) noexcept {
  double sum = 0.0;
  for (double v : x) {
    if (v < -kDomainTolerance || std::isnan(v)) return kInf;
    sum += v;
  }
  if (std::abs(sum - 1.0) > kDomainTolerance) return kInf;
  double s = 0.0;
  for (double v : x) s += xlogx(std::max(v, 0.0));
  return s;
}

double loss_value(const ModelSpec& model, const DenseMatrix& Z) {
  if (Z.rows() != model.n() || Z.cols() != model.q()) {
    throw ContractError("loss_value: Z must be n x q");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < Z.rows(); ++i) s += model.sample_loss(i, Z.row(i));
  return s;
}

double conjugate_value(const ModelSpec& model, std::size_t i, std::span<const double> u) {
  if (i >= model.n() || u.size() != model.q()) {
    throw ContractError("conjugate_value: bad sample index or argument length");
  }
  return model.sample_conjugate(i, u);
}

DenseMatrix gradient_map(const ModelSpec& model, const DenseMatrix& Z) {
  if (Z.rows() != model.n() || Z.cols() != model.q()) {
    throw ContractError("gradient_map: Z must be n x q");
  }
  DenseMatrix G(Z.rows(), Z.cols());
  for (std::size_t i = 0; i < Z.rows(); ++i) model.sample_gradient(i, Z.row(i), G.row(i));
  return G;
}

double lambda_max(const ModelSpec& model, const DesignMatrix& X) {
  if (X.n() != model.n()) throw ContractError("lambda_max: X and targets disagree on n");
  const DenseMatrix G0 = gradient_map(model, DenseMatrix(model.n(), model.q()));
  return dual_norm_omega_star(X, G0);
}

double group_norm_sum(const DenseMatrix& B) {
  double s = 0.0;
  for (std::size_t j = 0; j < B.rows(); ++j) s += l2_norm(B.row(j));
  return s;
}

double primal_value(const ProblemInstance& prob, const DenseMatrix& B, const DenseMatrix& Z) {
  if (B.rows() != prob.X().p() || B.cols() != prob.model().q()) {
    throw ContractError("primal_value: B must be p x q");
  }
  return loss_value(prob.model(), Z) + prob.lambda() * group_norm_sum(B);
}

double dual_value(const ModelSpec& model, const DenseMatrix& Theta, double lambda) {
  if (Theta.rows() != model.n() || Theta.cols() != model.q()) {
    throw ContractError("dual_value: Theta must be n x q");
  }
  std::vector<double> u(model.q());
  double s = 0.0;
  for (std::size_t i = 0; i < Theta.rows(); ++i) {
    auto th = Theta.row(i);
    for (std::size_t k = 0; k < u.size(); ++k) u[k] = -lambda * th[k];
    const double c = model.sample_conjugate(i, u);
    if (c == kInf) return -kInf;
    s += c;
  }
  return -s;
}

double duality_gap(const ProblemInstance& prob, const DenseMatrix& B, const DenseMatrix& Z,
                   const DenseMatrix& Theta) {
  return primal_value(prob, B, Z) - dual_value(prob.model(), Theta, prob.lambda());
}

std::vector<double> column_correlations(const DesignMatrix& X, const DenseMatrix& M) {
  std::vector<double> out(X.p());
  std::vector<double> buf(M.cols());
  for (std::size_t j = 0; j < X.p(); ++j) {
    X.col_dot_mat_into(j, M, buf);
    out[j] = l2_norm(buf);
  }
  return out;
}

double dual_norm_omega_star(const DesignMatrix& X, const DenseMatrix& M,
                            std::optional<std::span<const std::uint8_t>> mask) {
  if (M.rows() != X.n()) throw ContractError("dual_norm_omega_star: M must have n rows");
  if (mask && mask->size() != X.p()) {
    throw ContractError("dual_norm_omega_star: mask must have p entries");
  }
  std::vector<double> buf(M.cols());
  double best = 0.0;
  for (std::size_t j = 0; j < X.p(); ++j) {
    if (mask && !(*mask)[j]) continue;
    X.col_dot_mat_into(j, M, buf);
    best = std::max(best, l2_norm(buf));
  }
  return best;
}

}  // namespace gapsafe
