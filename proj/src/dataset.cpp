#include "gapsafe/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

namespace gapsafe {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<std::size_t> parse_index(std::string_view s) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

// Comma-separated cells; a cell may be wrapped in double quotes with ""
// standing for a literal quote. Quoted line breaks are not supported.
std::vector<std::string> split_csv(std::string_view line, const std::string& source,
                                   std::size_t lineno) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) throw ParseError(source, lineno, "unterminated quoted field");
  cells.push_back(std::move(cur));
  return cells;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return in;
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Dataset parse_svmlight(std::istream& in, const std::string& source,
                       const SvmlightOptions& options) {
  std::vector<Triplet> triplets;
  std::vector<double> labels;
  std::size_t p = options.n_features;
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::pair<std::size_t, double>> feats;

  while (std::getline(in, line)) {
    ++lineno;
    std::string_view body = line;
    if (const auto hash = body.find('#'); hash != std::string_view::npos) {
      body = body.substr(0, hash);
    }
    const auto tokens = split_ws(body);
    if (tokens.empty()) continue;

    const auto label = parse_double(tokens[0]);
    if (!label) throw ParseError(source, lineno, "bad label '" + std::string(tokens[0]) + "'");

    feats.clear();
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const auto tok = tokens[t];
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError(source, lineno, "expected index:value, got '" + std::string(tok) + "'");
      }
      if (tok.substr(0, colon) == "qid") continue;
      const auto idx = parse_index(tok.substr(0, colon));
      const auto val = parse_double(tok.substr(colon + 1));
      if (!idx || !val) {
        throw ParseError(source, lineno, "malformed feature '" + std::string(tok) + "'");
      }
      if (*idx == 0) throw ParseError(source, lineno, "feature indices are 1-based");
      if (options.strict && !feats.empty() && *idx <= feats.back().first) {
        throw ParseError(source, lineno, "feature indices must be strictly increasing");
      }
      feats.emplace_back(*idx, *val);
    }
    std::sort(feats.begin(), feats.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t k = 1; k < feats.size(); ++k) {
      if (feats[k].first == feats[k - 1].first) {
        throw ParseError(source, lineno,
                         "duplicate feature index " + std::to_string(feats[k].first));
      }
    }
    const std::size_t row = labels.size();
    for (const auto& [idx, val] : feats) {
      triplets.push_back({row, idx - 1, val});
      p = std::max(p, idx);
    }
    labels.push_back(*label);
  }

  const std::size_t n = labels.size();
  return {DesignMatrix::from_triplets(n, p, std::move(triplets)), DenseMatrix::column(labels),
          source, "svmlight"};
}

Dataset load_svmlight(const std::filesystem::path& path, const SvmlightOptions& options) {
  auto in = open_input(path);
  return parse_svmlight(in, path.string(), options);
}

void write_svmlight(const Dataset& data, std::ostream& out) {
  if (data.labels.cols() != 1) throw ContractError("write_svmlight: single label column only");
  const DesignMatrix sparse = data.X.to_sparse();
  std::vector<std::vector<std::pair<std::size_t, double>>> rows(sparse.n());
  for (std::size_t j = 0; j < sparse.p(); ++j) {
    sparse.for_each_in_col(j, [&](std::size_t i, double v) {
      if (v != 0.0) rows[i].emplace_back(j + 1, v);
    });
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << format_value(data.labels(i, 0));
    for (const auto& [idx, v] : rows[i]) out << ' ' << idx << ':' << format_value(v);
    out << '\n';
  }
}

Dataset parse_csv_dense(std::istream& in, const std::string& source,
                        const std::vector<std::size_t>& label_columns) {
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  bool first = true;
  std::vector<std::vector<double>> rows;

  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line, source, lineno);
    std::vector<double> values;
    values.reserve(cells.size());
    bool numeric = true;
    for (const auto& c : cells) {
      const auto v = parse_double(c);
      if (!v) {
        numeric = false;
        break;
      }
      values.push_back(*v);
    }
    if (first) {
      first = false;
      width = cells.size();
      if (!numeric) continue;  // header
    }
    if (cells.size() != width) {
      throw ParseError(source, lineno,
                       "expected " + std::to_string(width) + " cells, got " +
                           std::to_string(cells.size()));
    }
    if (!numeric) throw ParseError(source, lineno, "non-numeric cell");
    rows.push_back(std::move(values));
  }

  for (std::size_t c : label_columns) {
    if (c >= width) throw ContractError("label column " + std::to_string(c) + " out of range");
  }
  std::vector<bool> is_label(width, false);
  for (std::size_t c : label_columns) is_label[c] = true;

  const std::size_t n = rows.size();
  const std::size_t p = width - label_columns.size();
  std::vector<double> xs;
  xs.reserve(n * p);
  DenseMatrix labels(n, label_columns.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < width; ++c)
      if (!is_label[c]) xs.push_back(rows[i][c]);
    for (std::size_t k = 0; k < label_columns.size(); ++k) labels(i, k) = rows[i][label_columns[k]];
  }
  return {DesignMatrix::dense_row_major(n, p, xs), std::move(labels), source, "csv"};
}

Dataset load_csv_dense(const std::filesystem::path& path,
                       const std::vector<std::size_t>& label_columns) {
  auto in = open_input(path);
  return parse_csv_dense(in, path.string(), label_columns);
}

ModelSpec make_model(ModelKind kind, const DenseMatrix& labels) {
  switch (kind) {
    case ModelKind::Lasso:
    case ModelKind::Logistic:
      if (labels.cols() != 1) {
        throw ContractError(std::string(model_name(kind)) + " expects exactly one label column");
      }
      return ModelSpec(kind, labels);
    case ModelKind::MultiTaskLasso:
      return ModelSpec::multi_task(labels);
    case ModelKind::Multinomial: {
      if (labels.cols() != 1) throw ContractError("multinomial expects one class-index column");
      std::vector<int> classes;
      classes.reserve(labels.rows());
      for (double v : labels.values()) {
        if (v != std::floor(v) || v < 1.0) {
          throw ContractError("multinomial class labels must be integers starting at 1");
        }
        classes.push_back(static_cast<int>(v));
      }
      return ModelSpec::multinomial_from_classes(classes);
    }
  }
  throw ContractError("unknown model");
}

}  // namespace gapsafe
