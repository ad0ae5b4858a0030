#pragma once

#include "smc/errors.hpp"
#include "smc/linalg.hpp"
#include "smc/models/gaussian.hpp"
#include "smc/models/model.hpp"

#include <charconv>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace smc {

/// Standardized design matrix with a leading intercept column.
struct BinaryDataset {
  Mat design;                      // J x d
  Vec labels;                      // J, entries in {0, 1}
  std::vector<std::string> names;  // d

  std::size_t rows() const { return static_cast<std::size_t>(design.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(design.cols()); }
};

struct BinaryLoadOptions {
  std::string label_column;
  /// Maps a two-valued string label column to {0, 1}; this value becomes 1.
  std::optional<std::string> positive_label = std::nullopt;
  /// Drop predictors whose |correlation| with an earlier kept predictor exceeds this.
  std::optional<double> drop_correlated_above = std::nullopt;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  std::string out(s.substr(b, e - b + 1));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
      field.push_back(c);
    } else if (c == ',' && !quoted) {
      out.push_back(trim(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  out.push_back(trim(field));
  return out;
}

inline std::optional<double> parse_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

/// Reads a header + rows CSV; every row must have the header's field count.
inline std::pair<std::vector<std::string>, std::vector<std::vector<std::string>>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open file: " + path);
  std::string line;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (header.empty()) {
      header = std::move(fields);
      continue;
    }
    if (fields.size() != header.size())
      throw IngestionError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                           " fields, found " + std::to_string(fields.size()));
    for (std::size_t k = 0; k < fields.size(); ++k)
      if (fields[k].empty() || fields[k] == "NA" || fields[k] == "?")
        throw IngestionError(path + ":" + std::to_string(line_no) + ": missing value in column '" + header[k] + "'");
    rows.push_back(std::move(fields));
  }
  if (header.empty()) throw IngestionError("empty file: " + path);
  return {std::move(header), std::move(rows)};
}

}  // namespace detail

/// Loads a labelled CSV, standardizes every predictor to mean 0 and sample
/// variance 1 (n - 1 denominator) and prepends an intercept column.
inline BinaryDataset load_binary_dataset(const std::string& path, const BinaryLoadOptions& options) {
  auto [header, rows] = detail::read_csv(path);
  if (rows.size() < 2) throw IngestionError("need at least two observations: " + path);

  std::size_t label_idx = header.size();
  for (std::size_t k = 0; k < header.size(); ++k)
    if (header[k] == options.label_column) label_idx = k;
  if (label_idx == header.size()) throw IngestionError("label column '" + options.label_column + "' not found");

  const auto n = static_cast<Eigen::Index>(rows.size());
  Vec labels(n);
  std::set<std::string> distinct;
  for (const auto& r : rows) distinct.insert(r[label_idx]);
  if (distinct.size() > 2) throw IngestionError("non-binary labels in column '" + options.label_column + "'");
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::string& raw = rows[static_cast<std::size_t>(i)][label_idx];
    if (options.positive_label) {
      labels[i] = raw == *options.positive_label ? 1.0 : 0.0;
      continue;
    }
    const auto v = detail::parse_double(raw);
    if (!v || (*v != 0.0 && *v != 1.0))
      throw IngestionError("non-binary labels in column '" + options.label_column + "': '" + raw + "'");
    labels[i] = *v;
  }

  std::vector<std::string> names;
  std::vector<Vec> columns;
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (k == label_idx) continue;
    Vec col(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto v = detail::parse_double(rows[static_cast<std::size_t>(i)][k]);
      if (!v || !std::isfinite(*v))
        throw IngestionError("non-numeric value '" + rows[static_cast<std::size_t>(i)][k] + "' in column '" +
                             header[k] + "'");
      col[i] = *v;
    }
    const double mean = col.mean();
    const double var = (col.array() - mean).square().sum() / static_cast<double>(n - 1);
    if (!(var > 0.0)) throw IngestionError("constant column '" + header[k] + "' has zero variance");
    col = (col.array() - mean) / std::sqrt(var);
    names.push_back(header[k]);
    columns.push_back(std::move(col));
  }

  if (options.drop_correlated_above) {
    const double threshold = *options.drop_correlated_above;
    std::vector<std::size_t> kept;
    for (std::size_t k = 0; k < columns.size(); ++k) {
      bool keep = true;
      for (std::size_t j : kept) {
        // columns are standardized, so the correlation is a scaled dot product
        const double corr = columns[k].dot(columns[j]) / static_cast<double>(n - 1);
        if (std::abs(corr) > threshold) {
          keep = false;
          break;
        }
      }
      if (keep) kept.push_back(k);
    }
    std::vector<Vec> c2;
    std::vector<std::string> n2;
    for (std::size_t k : kept) {
      c2.push_back(std::move(columns[k]));
      n2.push_back(std::move(names[k]));
    }
    columns = std::move(c2);
    names = std::move(n2);
  }

  BinaryDataset out;
  out.design.resize(n, static_cast<Eigen::Index>(columns.size() + 1));
  out.design.col(0).setOnes();
  for (std::size_t k = 0; k < columns.size(); ++k) out.design.col(static_cast<Eigen::Index>(k + 1)) = columns[k];
  out.labels = std::move(labels);
  out.names.reserve(columns.size() + 1);
  out.names.emplace_back("(Intercept)");
  for (auto& nm : names) out.names.push_back(std::move(nm));
  return out;
}

enum class Link { logit, probit };

/// Bernoulli regression with a N(0, I) prior on the coefficients.
class BinaryRegressionModel final : public Model {
 public:
  BinaryRegressionModel(BinaryDataset data, Link link)
      : data_(std::move(data)), link_(link), prior_(GaussianDensity::standard(data_.cols())) {
    if (data_.design.rows() != data_.labels.size()) throw ConfigError("design/labels size mismatch");
    if (data_.design.cols() < 1) throw ConfigError("empty design matrix");
    for (Eigen::Index i = 0; i < data_.labels.size(); ++i)
      if (data_.labels[i] != 0.0 && data_.labels[i] != 1.0) throw ConfigError("labels must be 0 or 1");
  }

  std::size_t dim() const override { return data_.cols(); }
  std::string name() const override { return link_ == Link::logit ? "logit" : "probit"; }
  Link link() const { return link_; }
  const BinaryDataset& data() const { return data_; }

  double log_prior(const Vec& x) const override { return prior_.logpdf(x); }
  Vec grad_log_prior(const Vec& x) const override { return -x; }
  Vec sample_prior(Rng& rng) const override { return prior_.sample(rng); }

  double log_likelihood(const Vec& x) const override {
    const Vec eta = data_.design * x;
    double total = 0.0;
    if (link_ == Link::logit) {
      for (Eigen::Index j = 0; j < eta.size(); ++j) {
        // y*eta - log(1 + e^eta)
        const double e = eta[j];
        total += data_.labels[j] * e - (std::max(e, 0.0) + std::log1p(std::exp(-std::abs(e))));
      }
    } else {
      for (Eigen::Index j = 0; j < eta.size(); ++j)
        total += data_.labels[j] == 1.0 ? log_normal_cdf(eta[j]) : log_normal_cdf(-eta[j]);
    }
    return total;
  }

  Vec grad_log_likelihood(const Vec& x) const override {
    const Vec eta = data_.design * x;
    Vec r(eta.size());
    if (link_ == Link::logit) {
      for (Eigen::Index j = 0; j < eta.size(); ++j) {
        const double e = eta[j];
        const double sig = e >= 0.0 ? 1.0 / (1.0 + std::exp(-e)) : std::exp(e) / (1.0 + std::exp(e));
        r[j] = data_.labels[j] - sig;
      }
    } else {
      for (Eigen::Index j = 0; j < eta.size(); ++j)
        r[j] = data_.labels[j] == 1.0 ? normal_hazard_ratio(eta[j]) : -normal_hazard_ratio(-eta[j]);
    }
    return data_.design.transpose() * r;
  }

 private:
  BinaryDataset data_;
  Link link_;
  GaussianDensity prior_;
};

inline std::shared_ptr<BinaryRegressionModel> build_logit_model(BinaryDataset data) {
  return std::make_shared<BinaryRegressionModel>(std::move(data), Link::logit);
}

inline std::shared_ptr<BinaryRegressionModel> build_probit_model(BinaryDataset data) {
  return std::make_shared<BinaryRegressionModel>(std::move(data), Link::probit);
}

}  // namespace smc
