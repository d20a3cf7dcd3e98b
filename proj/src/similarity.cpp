#include "sigcd/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "sigcd/errors.hpp"
#include "sigcd/signature.hpp"

namespace sigcd {

namespace {

SymMatrix make_unit_diag(std::size_t n, MatrixKind kind) {
  SymMatrix m;
  m.n = n;
  m.kind = kind;
  m.a.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

double row_distance2(const FeatureMatrix& f, std::size_t i, std::size_t j) {
  double sum = 0.0;
  const double* a = &f.a[i * f.n_cols];
  const double* b = &f.a[j * f.n_cols];
  for (std::size_t c = 0; c < f.n_cols; ++c) {
    const double d = a[c] - b[c];
    sum += d * d;
  }
  return sum;
}

} // namespace

std::string matrix_kind_name(MatrixKind kind) {
  switch (kind) {
    case MatrixKind::correlation: return "correlation";
    case MatrixKind::similarity_ed: return "sig-ed";
    case MatrixKind::similarity_cs: return "sig-cs";
    case MatrixKind::similarity_rbf: return "sig-rbf";
  }
  return "unknown";
}

double SymMatrix::total_sum() const {
  double sum = 0.0;
  for (double v : a) sum += v;
  return sum;
}

SymMatrix correlation_matrix(const ReturnsPanel& returns) {
  const std::size_t n = returns.n_series();
  const std::size_t t_count = returns.n_obs();
  if (n < 2) throw std::invalid_argument("correlation needs N >= 2");
  if (t_count < 2) throw std::invalid_argument("correlation needs T >= 2");

  std::vector<double> mean(n, 0.0), var(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t t = 0; t < t_count; ++t) sum += returns.value(i, t);
    mean[i] = sum / static_cast<double>(t_count);
    double sq = 0.0;
    for (std::size_t t = 0; t < t_count; ++t) {
      const double d = returns.value(i, t) - mean[i];
      sq += d * d;
    }
    var[i] = sq / static_cast<double>(t_count);
    if (var[i] <= 0.0)
      throw DataError("zero-variance series: " + returns.tickers[i]);
  }

  SymMatrix corr = make_unit_diag(n, MatrixKind::correlation);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double cov = 0.0;
      for (std::size_t t = 0; t < t_count; ++t)
        cov += (returns.value(i, t) - mean[i]) *
               (returns.value(j, t) - mean[j]);
      cov /= static_cast<double>(t_count);
      double rho = cov / std::sqrt(var[i] * var[j]);
      rho = std::clamp(rho, -1.0, 1.0);
      corr.at(i, j) = rho;
      corr.at(j, i) = rho;
    }
  }
  return corr;
}

FeatureMatrix signature_features(const ReturnsPanel& returns, int depth,
                                 bool on_increments) {
  if (depth < 1) throw std::invalid_argument("signature depth must be >= 1");
  const std::size_t n = returns.n_series();
  const std::size_t t_count = returns.n_obs();

  FeatureMatrix features;
  features.n_rows = n;
  features.n_cols = (std::size_t{1} << (depth + 1)) - 2; // d=2
  features.a.assign(n * features.n_cols, 0.0);

  std::vector<double> stream(t_count + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    stream[0] = 0.0;
    if (on_increments) {
      for (std::size_t t = 0; t < t_count; ++t)
        stream[t + 1] = returns.value(i, t);
    } else {
      for (std::size_t t = 0; t < t_count; ++t)
        stream[t + 1] = stream[t] + returns.value(i, t);
    }
    const auto sig = path_signature(lead_lag(stream), depth);
    const auto row = signature_feature_vector(sig);
    std::copy(row.begin(), row.end(), features.a.begin() + static_cast<std::ptrdiff_t>(i * features.n_cols));
  }
  return features;
}

void standardize_features(FeatureMatrix& features) {
  const std::size_t n = features.n_rows;
  if (n == 0) return;
  for (std::size_t c = 0; c < features.n_cols; ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += features(i, c);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = features(i, c) - mean;
      var += d * d;
    }
    var /= static_cast<double>(n);
    if (var <= 0.0) continue;
    const double inv_sd = 1.0 / std::sqrt(var);
    for (std::size_t i = 0; i < n; ++i)
      features.at(i, c) = (features(i, c) - mean) * inv_sd;
  }
}

SymMatrix similarity_ed(const FeatureMatrix& features) {
  const std::size_t n = features.n_rows;
  SymMatrix sim = make_unit_diag(n, MatrixKind::similarity_ed);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p = 1.0 / (1.0 + std::sqrt(row_distance2(features, i, j)));
      sim.at(i, j) = p;
      sim.at(j, i) = p;
    }
  return sim;
}

SymMatrix similarity_cs(const FeatureMatrix& features) {
  const std::size_t n = features.n_rows;
  std::vector<double> norm(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t c = 0; c < features.n_cols; ++c) {
      const double v = features(i, c);
      sum += v * v;
    }
    norm[i] = std::sqrt(sum);
    if (norm[i] <= 0.0)
      throw DataError("cosine similarity undefined: zero feature row " +
                      std::to_string(i));
  }

  SymMatrix sim = make_unit_diag(n, MatrixKind::similarity_cs);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double dot = 0.0;
      const double* a = &features.a[i * features.n_cols];
      const double* b = &features.a[j * features.n_cols];
      for (std::size_t c = 0; c < features.n_cols; ++c) dot += a[c] * b[c];
      const double cosine = std::clamp(dot / (norm[i] * norm[j]), -1.0, 1.0);
      const double p = 0.5 * (1.0 + cosine);
      sim.at(i, j) = p;
      sim.at(j, i) = p;
    }
  return sim;
}

SymMatrix similarity_rbf(const FeatureMatrix& features, double gamma) {
  const std::size_t n = features.n_rows;
  if (gamma <= 0.0) {
    // Median heuristic over off-diagonal pairwise distances.
    std::vector<double> dist;
    dist.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        dist.push_back(std::sqrt(row_distance2(features, i, j)));
    if (dist.empty())
      throw std::invalid_argument("rbf median heuristic needs N >= 2");
    std::sort(dist.begin(), dist.end());
    const std::size_t half = dist.size() / 2;
    const double median = (dist.size() % 2 == 1)
                              ? dist[half]
                              : 0.5 * (dist[half - 1] + dist[half]);
    if (median <= 0.0)
      throw DataError("rbf median heuristic: all pairwise distances are zero");
    gamma = 1.0 / (2.0 * median * median);
  }

  SymMatrix sim = make_unit_diag(n, MatrixKind::similarity_rbf);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p = std::exp(-gamma * row_distance2(features, i, j));
      sim.at(i, j) = p;
      sim.at(j, i) = p;
    }
  return sim;
}

std::string matrix_to_csv(const SymMatrix& matrix,
                          const std::vector<std::string>& tickers) {
  if (tickers.size() != matrix.n)
    throw std::invalid_argument("ticker count does not match matrix size");
  std::ostringstream out;
  out << "ticker";
  for (const auto& t : tickers) out << ',' << t;
  out << '\n';
  char buf[40];
  for (std::size_t i = 0; i < matrix.n; ++i) {
    out << tickers[i];
    for (std::size_t j = 0; j < matrix.n; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", matrix(i, j));
      out << ',' << buf;
    }
    out << '\n';
  }
  return out.str();
}

void write_matrix_csv(const SymMatrix& matrix,
                      const std::vector<std::string>& tickers,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write matrix file: " + path);
  out << matrix_to_csv(matrix, tickers);
  if (!out) throw DataError("write failed: " + path);
}

} // namespace sigcd
