#ifndef SIGCD_SIMILARITY_HPP
#define SIGCD_SIMILARITY_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "sigcd/panel.hpp"

namespace sigcd {

enum class MatrixKind { correlation, similarity_ed, similarity_cs, similarity_rbf };

std::string matrix_kind_name(MatrixKind kind);

// Dense symmetric matrix with unit diagonal. Correlation entries live in
// [-1,1], similarity entries in [0,1].
struct SymMatrix {
  std::size_t n = 0;
  MatrixKind kind = MatrixKind::correlation;
  std::vector<double> a; // row-major n*n

  double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
  double& at(std::size_t i, std::size_t j) { return a[i * n + j]; }

  // Sum over all entries, diagonal included.
  double total_sum() const;
};

// Row-major N x F feature block.
struct FeatureMatrix {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<double> a;

  double operator()(std::size_t i, std::size_t j) const {
    return a[i * n_cols + j];
  }
  double& at(std::size_t i, std::size_t j) { return a[i * n_cols + j]; }
};

// Pearson correlation with 1/T covariance normalization; the diagonal is
// forced to exactly 1 and off-diagonals are clamped to [-1,1]. A
// zero-variance series is a data error naming the ticker.
SymMatrix correlation_matrix(const ReturnsPanel& returns);

// Row i = feature vector of the depth-M signature of the lead-lag path of
// row i's cumulative return stream (re-based at 0). When on_increments is
// set, the stream is instead 0 followed by the raw increments.
FeatureMatrix signature_features(const ReturnsPanel& returns, int depth,
                                 bool on_increments = false);

// Z-scores each feature column in place; constant columns are left alone.
void standardize_features(FeatureMatrix& features);

// p_ij = 1 / (1 + ||f_i - f_j||_2)
SymMatrix similarity_ed(const FeatureMatrix& features);

// p_ij = (1 + cos(f_i, f_j)) / 2; a zero feature row is a data error.
SymMatrix similarity_cs(const FeatureMatrix& features);

// p_ij = exp(-gamma * ||f_i - f_j||^2). gamma <= 0 selects the median
// heuristic gamma = 1 / (2 m^2), m = median off-diagonal distance.
SymMatrix similarity_rbf(const FeatureMatrix& features, double gamma);

// CSV dump with ticker header row/column at full precision.
std::string matrix_to_csv(const SymMatrix& matrix,
                          const std::vector<std::string>& tickers);
void write_matrix_csv(const SymMatrix& matrix,
                      const std::vector<std::string>& tickers,
                      const std::string& path);

} // namespace sigcd

#endif
