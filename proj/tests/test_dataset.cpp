#include <doctest.h>

#include <algorithm>
#include <functional>
#include <sstream>

#include "gapsafe/dataset.hpp"
#include "gapsafe/errors.hpp"

using namespace gapsafe;

namespace {

Dataset svm(const std::string& text, SvmlightOptions opt = {}) {
  std::istringstream in(text);
  return parse_svmlight(in, "mem", opt);
}

Dataset csv(const std::string& text, std::vector<std::size_t> labels = {0}) {
  std::istringstream in(text);
  return parse_csv_dense(in, "mem", labels);
}

std::size_t error_line(const std::function<void()>& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST_CASE("svmlight basics") {
  const auto d = svm("1 1:0.5 3:2.0\n");
  CHECK(d.X.n() == 1);
  CHECK(d.X.p() == 3);
  CHECK(d.X.is_sparse());
  CHECK(d.X.nnz() == 2);
  CHECK(d.labels(0, 0) == 1.0);
  const auto D = d.X.to_dense();
  CHECK(D(0, 0) == 0.5);
  CHECK(D(0, 1) == 0.0);
  CHECK(D(0, 2) == 2.0);

  const auto e = svm("-1\n1 2:1 # trailing comment\n\n# only a comment\n");
  CHECK(e.X.n() == 2);
  CHECK(e.labels(0, 0) == -1.0);
  CHECK(e.X.to_dense()(0, 1) == 0.0);

  CHECK(svm("0 qid:3 1:1\n").X.nnz() == 1);
  SvmlightOptions wide;
  wide.n_features = 10;
  CHECK(svm("1 2:1\n", wide).X.p() == 10);
}

TEST_CASE("svmlight index order and errors") {
  const auto sorted = svm("2 3:1 1:1\n");
  CHECK(sorted.X.to_dense()(0, 0) == 1.0);
  CHECK(sorted.X.to_dense()(0, 2) == 1.0);
  SvmlightOptions strict;
  strict.strict = true;
  CHECK_THROWS_AS(svm("2 3:1 1:1\n", strict), ParseError);
  CHECK(error_line([] { svm("1 1:1\n1 2:1 2:3\n"); }) == 2);
  CHECK(error_line([] { svm("1 1:1\n\n1 0:1\n"); }) == 3);
  CHECK(error_line([] { svm("x 1:1\n"); }) == 1);
  CHECK(error_line([] { svm("1 1-2\n"); }) == 1);
  CHECK(error_line([] { svm("1 1:abc\n"); }) == 1);
}

TEST_CASE("svmlight round trip") {
  const auto d = svm("1 1:0.1 4:-2.5e-7\n0\n3 2:0.30000000000000004 3:1e300\n");
  std::ostringstream out;
  write_svmlight(d, out);
  const auto back = svm(out.str(), SvmlightOptions{false, d.X.p()});
  CHECK(back.X.n() == d.X.n());
  CHECK(back.X.p() == d.X.p());
  CHECK(std::ranges::equal(back.X.col_ptr(), d.X.col_ptr()));
  CHECK(std::ranges::equal(back.X.row_idx(), d.X.row_idx()));
  CHECK(std::ranges::equal(back.X.nonzeros(), d.X.nonzeros()));
  CHECK(frobenius_distance(back.labels, d.labels) == 0.0);
  std::ostringstream again;
  write_svmlight(back, again);
  CHECK(again.str() == out.str());
}

TEST_CASE("csv parsing") {
  const auto d = csv("1,2,3\n4,5,6\n7,8,9\n");
  CHECK(d.X.n() == 3);
  CHECK(d.X.p() == 2);
  CHECK_FALSE(d.X.is_sparse());
  CHECK(d.labels(1, 0) == 4.0);
  CHECK(d.X.to_dense()(2, 1) == 9.0);

  CHECK(csv("0.5,1,2\n").X.n() == 1);
  const auto h = csv("y,\"feature, one\",b\n1,2,3\n");
  CHECK(h.X.n() == 1);
  CHECK(h.X.to_dense()(0, 0) == 2.0);

  const auto multi = csv("1,2,3,4\n5,6,7,8\n", {3, 1});
  CHECK(multi.labels.cols() == 2);
  CHECK(multi.labels(0, 0) == 4.0);
  CHECK(multi.labels(0, 1) == 2.0);
  CHECK(multi.X.p() == 2);

  CHECK(error_line([] { csv("1,2\n3\n"); }) == 2);
  CHECK(error_line([] { csv("1,2\n3,abc\n"); }) == 2);
  CHECK_THROWS_AS(csv("1,2\n", {5}), ContractError);
}

TEST_CASE("labels become model targets") {
  DenseMatrix classes(4, 1, std::vector<double>{1, 3, 2, 3});
  const auto m = make_model(ModelKind::Multinomial, classes);
  CHECK(m.q() == 3);
  CHECK(m.targets()(1, 2) == 1.0);
  CHECK(m.targets()(1, 0) == 0.0);
  CHECK_THROWS_AS(make_model(ModelKind::Multinomial, DenseMatrix(2, 1, std::vector<double>{1, 3})),
                  ContractError);
  CHECK_THROWS_AS(make_model(ModelKind::Logistic, DenseMatrix(2, 1, std::vector<double>{1, -1})),
                  ContractError);
  CHECK_THROWS_AS(make_model(ModelKind::Lasso, DenseMatrix(2, 2)), ContractError);
  CHECK(make_model(ModelKind::MultiTaskLasso, DenseMatrix(2, 2)).q() == 2);
}

TEST_CASE("synthetic data is reproducible") {
  SyntheticConfig cfg;
  cfg.n = 20;
  cfg.p = 30;
  cfg.density = 0.2;
  cfg.seed = 42;
  const auto a = make_synthetic(cfg);
  const auto b = make_synthetic(cfg);
  CHECK(a.X.is_sparse());
  CHECK(std::ranges::equal(a.X.nonzeros(), b.X.nonzeros()));
  CHECK(frobenius_distance(a.labels, b.labels) == 0.0);
  cfg.kind = ModelKind::Multinomial;
  cfg.q = 4;
  const auto m = make_synthetic(cfg);
  CHECK(make_model(ModelKind::Multinomial, m.labels).q() == 4);
  cfg.kind = ModelKind::Logistic;
  CHECK_NOTHROW(make_model(ModelKind::Logistic, make_synthetic(cfg).labels));
}
