#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oracle {

double grid_conjugate(const ModelSpec& model, std::size_t i, const std::vector<double>& u) {
  const std::size_t q = u.size();
  const std::size_t m = q == 1 ? 2000 : (q == 2 ? 200 : 40);
  std::vector<double> center(q, 0.0);
  double half = 10.0;
  double step = 2.0 * half / m;
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> z(q);
  std::vector<std::size_t> idx(q);
  for (;;) {
    std::vector<double> lo(q);
    std::size_t count = 1;
    for (std::size_t k = 0; k < q; ++k) lo[k] = std::max(-10.0, center[k] - half);
    const std::size_t per = static_cast<std::size_t>(std::floor(2.0 * half / step)) + 1;
    for (std::size_t k = 0; k < q; ++k) count *= per;
    std::vector<double> arg = center;
    for (std::size_t c = 0; c < count; ++c) {
      std::size_t rem = c;
      bool inside = true;
      for (std::size_t k = 0; k < q; ++k) {
        z[k] = lo[k] + static_cast<double>(rem % per) * step;
        rem /= per;
        if (z[k] > 10.0 + 1e-12) inside = false;
      }
      if (!inside) continue;
      double val = -model.sample_loss(i, z);
      for (std::size_t k = 0; k < q; ++k) val += z[k] * u[k];
      if (val > best) {
        best = val;
        arg = z;
      }
    }
    if (step <= 1e-3) break;
    center = arg;
    half = 2.0 * step;
    step = step <= 1e-2 ? 1e-3 : step / 10.0;
  }
  return best;
}

DenseMatrix fd_gradient(const ModelSpec& model, const DenseMatrix& Z, double h) {
  DenseMatrix G(Z.rows(), Z.cols());
  DenseMatrix W = Z;
  for (std::size_t i = 0; i < Z.rows(); ++i) {
    for (std::size_t k = 0; k < Z.cols(); ++k) {
      const double z0 = W(i, k);
      W(i, k) = z0 + h;
      const double up = gapsafe::loss_value(model, W);
      W(i, k) = z0 - h;
      const double down = gapsafe::loss_value(model, W);
      W(i, k) = z0;
      G(i, k) = (up - down) / (2.0 * h);
    }
  }
  return G;
}

double soft_threshold(double v, double tau) {
  if (v > tau) return v - tau;
  if (v < -tau) return v + tau;
  return 0.0;
}

DenseMatrix dense_product(const DenseMatrix& X, const DenseMatrix& B) {
  DenseMatrix out(X.rows(), B.cols());
  for (std::size_t i = 0; i < X.rows(); ++i)
    for (std::size_t j = 0; j < X.cols(); ++j)
      for (std::size_t k = 0; k < B.cols(); ++k) out(i, k) += X(i, j) * B(j, k);
  return out;
}

double max_group_corr(const DenseMatrix& X, const DenseMatrix& M) {
  double best = 0.0;
  for (std::size_t j = 0; j < X.cols(); ++j) {
    double sq = 0.0;
    for (std::size_t k = 0; k < M.cols(); ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < X.rows(); ++i) s += X(i, j) * M(i, k);
      sq += s * s;
    }
    best = std::max(best, std::sqrt(sq));
  }
  return best;
}

bool in_simplex(const double* x, std::size_t q, double tol) {
  double sum = 0.0;
  for (std::size_t k = 0; k < q; ++k) {
    if (x[k] < -tol || x[k] > 1.0 + tol) return false;
    sum += x[k];
  }
  return std::abs(sum - 1.0) <= tol;
}

Instance random_instance(ModelKind kind, std::size_t n, std::size_t p, std::size_t q,
                         std::uint64_t seed, double density) {
  gapsafe::SyntheticConfig cfg;
  cfg.n = n;
  cfg.p = p;
  cfg.q = q;
  cfg.n_informative = std::min<std::size_t>(5, p);
  cfg.noise = 0.5;
  cfg.density = density;
  cfg.seed = seed;
  cfg.kind = kind;
  auto data = gapsafe::make_synthetic(cfg);

  std::vector<gapsafe::Triplet> entries;
  for (std::size_t j = 0; j < p; ++j) {
    const double norm = data.X.col_norm(j);
    const double s = norm > 0.0 ? 1.0 / norm : 0.0;
    data.X.for_each_in_col(j, [&](std::size_t i, double v) { entries.push_back({i, j, v * s}); });
  }
  auto scaled = gapsafe::DesignMatrix::from_triplets(n, p, std::move(entries));
  data.X = data.X.is_sparse() ? std::move(scaled) : gapsafe::DesignMatrix::from_dense(scaled.to_dense());
  auto model = gapsafe::make_model(kind, data.labels);
  return {std::move(data), std::move(model)};
}

gapsafe::SolveResult reference_solve(const DesignMatrix& X, const ModelSpec& model, double lambda,
                                     double eps) {
  gapsafe::SolverConfig cfg;
  cfg.rule = gapsafe::ScreeningRule::None;
  cfg.gap_tolerance = eps;
  cfg.max_epochs = 1000000;
  return gapsafe::solve(gapsafe::ProblemInstance(X, model, lambda), cfg);
}

}  // namespace oracle
