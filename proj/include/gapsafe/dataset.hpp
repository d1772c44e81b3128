#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gapsafe/linalg.hpp"
#include "gapsafe/models.hpp"

namespace gapsafe {

/// Design matrix plus raw labels as read from disk: real targets, binary
/// {0,1} labels or class indices {1..q}, one column per target.
struct Dataset {
  DesignMatrix X;
  DenseMatrix labels;
  std::string source;
  std::string format;
};

struct SvmlightOptions {
  /// Reject lines whose feature indices are not strictly increasing
  /// (otherwise they are sorted).
  bool strict = false;
  /// Minimum feature count; the largest index seen wins if larger.
  std::size_t n_features = 0;
};

/// "label idx:val idx:val ..." per line with 1-based indices. Text after
/// '#' is ignored, blank lines are skipped, and a label with no features is
/// an all-zero row. Duplicate indices on a line are rejected.
Dataset parse_svmlight(std::istream& in, const std::string& source,
                       const SvmlightOptions& options = {});
Dataset load_svmlight(const std::filesystem::path& path, const SvmlightOptions& options = {});
/// Single-target datasets only; zeros are not written.
void write_svmlight(const Dataset& data, std::ostream& out);

/// Rectangular numeric CSV. The first line is a header when any of its
/// cells is not a number. `label_columns` are 0-based and become the label
/// columns in the given order; every other column is a feature.
Dataset parse_csv_dense(std::istream& in, const std::string& source,
                        const std::vector<std::size_t>& label_columns = {0});
Dataset load_csv_dense(const std::filesystem::path& path,
                       const std::vector<std::size_t>& label_columns = {0});

/// Turns raw labels into model targets; multinomial class indices become
/// one-hot rows.
ModelSpec make_model(ModelKind kind, const DenseMatrix& labels);

struct SyntheticConfig {
  std::size_t n = 100;
  std::size_t p = 200;
  /// Targets for the multi-task model, classes for the multinomial one.
  std::size_t q = 1;
  std::size_t n_informative = 10;
  double noise = 0.1;
  /// Fraction of nonzero design entries; 1 gives a dense matrix.
  double density = 1.0;
  std::uint64_t seed = 0;
  ModelKind kind = ModelKind::Lasso;
};

/// Gaussian design, a Gaussian ground truth supported on n_informative
/// randomly chosen rows, and labels drawn from the model.
Dataset make_synthetic(const SyntheticConfig& config);

}  // namespace gapsafe
