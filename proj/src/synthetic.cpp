#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gapsafe/dataset.hpp"

namespace gapsafe {

Dataset make_synthetic(const SyntheticConfig& config) {
  if (config.n == 0 || config.p == 0 || config.q == 0) {
    throw ContractError("synthetic: n, p and q must be positive");
  }
  if (config.density <= 0.0 || config.density > 1.0) {
    throw ContractError("synthetic: density must lie in (0, 1]");
  }
  const bool single = config.kind == ModelKind::Lasso || config.kind == ModelKind::Logistic;
  const std::size_t q_coef = single ? 1 : config.q;
  if (config.kind == ModelKind::Multinomial && config.q < 2) {
    throw ContractError("synthetic: multinomial needs q >= 2 classes");
  }

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<Triplet> entries;
  std::vector<double> dense;
  const bool sparse = config.density < 1.0;
  if (!sparse) dense.resize(config.n * config.p);
  for (std::size_t j = 0; j < config.p; ++j) {
    for (std::size_t i = 0; i < config.n; ++i) {
      if (sparse) {
        if (unif(rng) < config.density) entries.push_back({i, j, normal(rng)});
      } else {
        dense[j * config.n + i] = normal(rng);
      }
    }
  }
  DesignMatrix X = sparse ? DesignMatrix::from_triplets(config.n, config.p, std::move(entries))
                          : DesignMatrix::dense_col_major(config.n, config.p, std::move(dense));

  std::vector<std::size_t> order(config.p);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  DenseMatrix B(config.p, q_coef);
  for (std::size_t k = 0; k < std::min(config.n_informative, config.p); ++k)
    for (std::size_t c = 0; c < q_coef; ++c) B(order[k], c) = normal(rng);

  DenseMatrix Z = X.multiply(B);
  DenseMatrix labels;
  switch (config.kind) {
    case ModelKind::Lasso:
    case ModelKind::MultiTaskLasso:
      labels = Z;
      for (double& v : labels.values()) v += config.noise * normal(rng);
      break;
    case ModelKind::Logistic:
      labels = DenseMatrix(config.n, 1);
      for (std::size_t i = 0; i < config.n; ++i) {
        const double prob = 1.0 / (1.0 + std::exp(-Z(i, 0)));
        labels(i, 0) = unif(rng) < prob ? 1.0 : 0.0;
      }
      break;
    case ModelKind::Multinomial:
      labels = DenseMatrix(config.n, 1);
      for (std::size_t i = 0; i < config.n; ++i) {
        auto z = Z.row(i);
        const double m = *std::max_element(z.begin(), z.end());
        std::vector<double> w(z.size());
        for (std::size_t k = 0; k < z.size(); ++k) w[k] = std::exp(z[k] - m);
        std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
        labels(i, 0) = static_cast<double>(pick(rng) + 1);
      }
      // Every class must be present for a valid one-hot encoding.
      for (std::size_t k = 0; k < std::min(config.q, config.n); ++k) {
        labels(k, 0) = static_cast<double>(k + 1);
      }
      break;
  }
  if (config.kind == ModelKind::Logistic && config.n >= 2) {
    // Both classes present.
    labels(0, 0) = 0.0;
    labels(1, 0) = 1.0;
  }
  return {std::move(X), std::move(labels), "synthetic", "synthetic"};
}

}  // namespace gapsafe
