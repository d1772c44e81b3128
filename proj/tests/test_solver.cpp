#include <doctest.h>

#include <cmath>
#include <random>

#include "gapsafe/errors.hpp"
#include "gapsafe/solver.hpp"
#include "oracles.hpp"

using namespace gapsafe;

namespace {

DenseMatrix col(std::vector<double> v) { return DenseMatrix::column(v); }

SolveResult run(const DesignMatrix& X, const ModelSpec& m, double lambda, ScreeningRule rule,
                double eps, std::size_t max_epochs = 100000) {
  SolverConfig cfg;
  cfg.rule = rule;
  cfg.gap_tolerance = eps;
  cfg.max_epochs = max_epochs;
  return solve(ProblemInstance(X, m, lambda), cfg);
}

const ModelKind kAllKinds[] = {ModelKind::Lasso, ModelKind::MultiTaskLasso, ModelKind::Logistic,
                               ModelKind::Multinomial};

}  // namespace

TEST_CASE("group soft threshold") {
  const std::vector<double> v{3.0, 4.0};
  CHECK(group_soft_threshold(v, 5.0) == std::vector<double>{0.0, 0.0});
  CHECK(group_soft_threshold(v, 0.0) == v);
  const auto half = group_soft_threshold(v, 2.5);
  CHECK(half[0] == doctest::Approx(1.5));
  CHECK(half[1] == doctest::Approx(2.0));
  CHECK(group_soft_threshold(std::vector<double>{0.0, 0.0}, 1.0) == std::vector<double>{0.0, 0.0});
  for (double x : {-3.0, -0.5, 0.0, 0.2, 2.5}) {
    CHECK(group_soft_threshold(std::vector<double>{x}, 1.0)[0] == oracle::soft_threshold(x, 1.0));
  }
}

TEST_CASE("block updates") {
  const std::vector<double> B{0.0, 0.0};
  const std::vector<double> u{3.0, 4.0};
  const auto q = block_update_quadratic(B, u, 2.0, 5.0);
  CHECK(q[0] == doctest::Approx(1.5));
  CHECK(q[1] == doctest::Approx(2.0));
  CHECK(block_update_quadratic(B, u, 1.0, 6.0) == std::vector<double>{0.0, 0.0});
  CHECK(block_update_quadratic(B, u, 1.0, 0.0) == u);

  const std::vector<double> g{0.0, 0.0};
  CHECK(block_update_prox(u, g, 1.0, 5.0) == std::vector<double>{0.0, 0.0});
  CHECK(block_update_prox(u, g, 1.0, 0.0) == u);
  CHECK_THROWS_AS(block_update_prox(u, g, 0.0, 1.0), ContractError);
}

TEST_CASE("one-feature logistic matches a grid search") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> nd;
  const std::size_t n = 30;
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = nd(rng);
    y[i] = (0.8 * x[i] + nd(rng)) > 0 ? 1.0 : 0.0;
  }
  const auto X = DesignMatrix::dense_col_major(n, 1, x);
  const auto m = ModelSpec::logistic(y);
  const double lambda = 0.3 * lambda_max(m, X);
  auto objective = [&](double b) {
    double s = lambda * std::abs(b);
    for (std::size_t i = 0; i < n; ++i) {
      const double z = x[i] * b;
      s += std::log1p(std::exp(z)) - y[i] * z;
    }
    return s;
  };
  double center = 0.0, half = 10.0;
  for (int level = 0; level < 6; ++level) {
    const double step = half / 100.0;
    double best = objective(center), arg = center;
    for (int k = -100; k <= 100; ++k) {
      const double b = center + k * step;
      if (const double v = objective(b); v < best) {
        best = v;
        arg = b;
      }
    }
    center = arg;
    half = 2.0 * step;
  }
  const auto res = run(X, m, lambda, ScreeningRule::GapDynamic, 1e-14);
  CHECK(res.converged);
  CHECK(std::abs(res.B(0, 0) - center) <= 1e-6);
}

TEST_CASE("closed-form cases") {
  const auto X = DesignMatrix::dense_col_major(1, 1, {1.0});
  const auto m = ModelSpec::lasso(std::vector<double>{2.0});
  const auto res = run(X, m, 1.0, ScreeningRule::GapDynamic, 1e-10);
  CHECK(res.converged);
  CHECK(res.B(0, 0) == doctest::Approx(oracle::soft_threshold(2.0, 1.0)));
  CHECK(res.gap <= 1e-10);

  for (auto kind : kAllKinds) {
    auto inst = oracle::random_instance(kind, 20, 30, 3, 2);
    const double lm = lambda_max(inst.model, inst.data.X);
    const auto r = run(inst.data.X, inst.model, lm, ScreeningRule::GapDynamic, 1e-10);
    CHECK(r.converged);
    CHECK(r.epochs_run == 0);
    CHECK(r.B.frobenius_norm() == 0.0);
    CHECK(r.gap <= 1e-10);
  }
}

TEST_CASE("screening rules agree with the unscreened solve") {
  auto inst = oracle::random_instance(ModelKind::Lasso, 50, 200, 1, 31);
  const auto& X = inst.data.X;
  const double lambda = 0.2 * lambda_max(inst.model, X);
  const auto none = run(X, inst.model, lambda, ScreeningRule::None, 1e-8);
  REQUIRE(none.converged);
  for (auto rule : {ScreeningRule::Static, ScreeningRule::GapDynamic, ScreeningRule::SafeEdppSeeded}) {
    const auto r = run(X, inst.model, lambda, rule, 1e-8);
    CHECK(r.converged);
    CHECK(frobenius_distance(r.B, none.B) <= 1e-6);
  }
}

TEST_CASE("primal objective never increases") {
  for (auto kind : kAllKinds) {
    auto inst = oracle::random_instance(kind, 30, 40, 3, 14);
    const auto& X = inst.data.X;
    const double lambda = 0.1 * lambda_max(inst.model, X);
    ProblemInstance prob(X, inst.model, lambda);
    std::vector<double> values;
    SolverConfig cfg;
    cfg.rule = ScreeningRule::None;
    cfg.gap_tolerance = 1e-14;
    cfg.screen_every = 1;
    cfg.max_epochs = 60;
    cfg.on_checkpoint = [&](const CheckpointView& v) {
      values.push_back(primal_value(prob, v.B, X.multiply(v.B)));
    };
    solve(prob, cfg);
    REQUIRE(values.size() > 10);
    for (std::size_t k = 1; k < values.size(); ++k) CHECK(values[k] <= values[k - 1] + 1e-12);
  }
}

TEST_CASE("screened solves: zero rows, permanent screening, honest gaps") {
  for (auto kind : kAllKinds) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      auto inst = oracle::random_instance(kind, 40, 120, 3, 50 + seed);
      const auto& X = inst.data.X;
      const double lambda = 0.25 * lambda_max(inst.model, X);
      SolverConfig cfg;
      cfg.gap_tolerance = 1e-7;
      cfg.max_epochs = 200000;
      std::vector<std::uint8_t> last(X.p(), 1);
      bool monotone = true;
      cfg.on_checkpoint = [&](const CheckpointView& v) {
        for (std::size_t j = 0; j < X.p(); ++j) {
          if (v.active.is_active(j) && !last[j]) monotone = false;
          last[j] = v.active.is_active(j) ? 1 : 0;
        }
        CHECK(v.gap >= -1e-10);
      };
      const auto res = solve(ProblemInstance(X, inst.model, lambda), cfg);
      CHECK(res.converged);
      CHECK(monotone);
      CHECK(res.active.n_active() < X.p());
      for (std::size_t j = 0; j < X.p(); ++j) {
        if (!res.active.is_active(j)) CHECK(res.B.row_is_zero(j));
      }
      CHECK(res.true_gap <= cfg.gap_tolerance * (1.0 + 1e-6));
    }
  }
}

TEST_CASE("traces are deterministic") {
  auto inst = oracle::random_instance(ModelKind::Logistic, 40, 80, 1, 3);
  const double lambda = 0.2 * lambda_max(inst.model, inst.data.X);
  const auto a = run(inst.data.X, inst.model, lambda, ScreeningRule::GapDynamic, 1e-8);
  const auto b = run(inst.data.X, inst.model, lambda, ScreeningRule::GapDynamic, 1e-8);
  REQUIRE(a.events.size() == b.events.size());
  for (std::size_t k = 0; k < a.events.size(); ++k) {
    CHECK(a.events[k].gap == b.events[k].gap);
    CHECK(a.events[k].n_active_after == b.events[k].n_active_after);
  }
  CHECK(frobenius_distance(a.B, b.B) == 0.0);
}

TEST_CASE("zero columns are screened before the first epoch") {
  const auto X = DesignMatrix::dense_col_major(3, 3, {1, 0, 1, 0, 0, 0, 0, 1, 1});
  const auto m = ModelSpec::lasso(std::vector<double>{1.0, 2.0, 3.0});
  const auto r = run(X, m, 0.1, ScreeningRule::None, 1e-10);
  CHECK_FALSE(r.active.is_active(1));
  CHECK(r.B(1, 0) == 0.0);
  CHECK(r.converged);
}

TEST_CASE("epoch limit and contracts") {
  auto inst = oracle::random_instance(ModelKind::Lasso, 30, 60, 1, 9);
  const double lambda = 0.05 * lambda_max(inst.model, inst.data.X);
  const auto r = run(inst.data.X, inst.model, lambda, ScreeningRule::GapDynamic, 1e-14, 3);
  CHECK_FALSE(r.converged);
  CHECK(r.epochs_run == 3);
  CHECK(r.gap > 1e-14);

  SolverConfig bad;
  bad.screen_every = 0;
  CHECK_THROWS_AS(bad.validate(), ContractError);
  bad.screen_every = 10;
  bad.gap_tolerance = 0.0;
  CHECK_THROWS_AS(bad.validate(), ContractError);

  SolverConfig ok;
  CHECK_THROWS_AS(solve(ProblemInstance(inst.data.X, inst.model, lambda), ok, DenseMatrix(2, 1)),
                  ContractError);
  CHECK(parse_rule("safe-edpp") == ScreeningRule::SafeEdppSeeded);
  CHECK_THROWS(parse_rule("strong"));
}

TEST_CASE("warm starts reach the same optimum") {
  auto inst = oracle::random_instance(ModelKind::MultiTaskLasso, 30, 50, 3, 19);
  const auto& X = inst.data.X;
  const double lambda = 0.3 * lambda_max(inst.model, X);
  const auto cold = run(X, inst.model, lambda, ScreeningRule::GapDynamic, 1e-10);
  SolverConfig cfg;
  cfg.gap_tolerance = 1e-10;
  DenseMatrix warm(X.p(), 3, 0.1);
  const auto w = solve(ProblemInstance(X, inst.model, lambda), cfg, warm);
  CHECK(w.converged);
  CHECK(frobenius_distance(w.B, cold.B) <= 1e-4);
}

TEST_CASE("sparse and dense designs give the same path through the solver") {
  auto inst = oracle::random_instance(ModelKind::Multinomial, 40, 60, 3, 4, 0.3);
  const auto& X = inst.data.X;
  REQUIRE(X.is_sparse());
  const auto D = DesignMatrix::from_dense(X.to_dense());
  const double lambda = 0.3 * lambda_max(inst.model, X);
  const auto a = run(X, inst.model, lambda, ScreeningRule::GapDynamic, 1e-9);
  const auto b = run(D, inst.model, lambda, ScreeningRule::GapDynamic, 1e-9);
  CHECK(a.converged);
  CHECK(b.converged);
  CHECK(frobenius_distance(a.B, b.B) <= 1e-6);
}
