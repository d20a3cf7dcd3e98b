#ifndef SIGCD_SPECTRAL_HPP
#define SIGCD_SPECTRAL_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "sigcd/similarity.hpp"

namespace sigcd {

// Full symmetric eigensystem. Eigenvalues are sorted descending;
// eigenvectors(i, k) is component i of the eigenvector paired with
// eigenvalues[k]. Each eigenvector's entry of largest magnitude is positive.
struct SpectralDecomposition {
  std::size_t n = 0;
  std::vector<double> eigenvalues;
  std::vector<double> vectors; // row-major, column k = eigenvector k

  double vector(std::size_t i, std::size_t k) const {
    return vectors[i * n + k];
  }
};

// C = C_r + C_m + C_g with the market mode C_m = lambda_max v v^T, noise
// C_r from eigenvalues at or below lambda_plus, and structure C_g from the
// band in between.
struct RmtSplit {
  std::size_t n = 0;
  std::vector<double> noise;     // C^(r)
  std::vector<double> market;    // C^(m)
  std::vector<double> structure; // C^(g)
  double lambda_minus = 0.0;
  double lambda_plus = 0.0;
  double lambda_max = 0.0;
  double sigma2 = 0.0;
  bool sigma2_fallback = false; // set when 1 - lambda_max/N <= 0
  std::size_t noise_count = 0;
  std::size_t structure_count = 0;
  std::vector<double> eigenvalues; // descending, for reporting
  std::vector<double> market_vector;
};

struct AdjacencyMatrix {
  std::size_t n = 0;
  std::vector<std::uint8_t> a; // row-major 0/1, zero diagonal

  bool edge(std::size_t i, std::size_t j) const { return a[i * n + j] != 0; }
  std::size_t edge_count() const;
  std::vector<std::size_t> degrees() const;
};

// Cyclic Jacobi. Converges when the off-diagonal Frobenius norm falls below
// 1e-12 relative to the matrix norm; 100 sweeps is a hard cap.
SpectralDecomposition eigh(const SymMatrix& matrix);

// Marcenko-Pastur support: Q = T/N, lambda_pm = sigma2 (1 +- sqrt(1/Q))^2.
// Requires T > N (the RMT regime).
std::pair<double, double> mp_bounds(std::size_t n_series, std::size_t n_obs,
                                    double sigma2);

// sigma2 = 1 - lambda_max/N (falling back to 1 when non-positive), MP bounds
// from n_obs observations, then the three-way eigenvalue bucket split.
RmtSplit rmt_decompose(const SymMatrix& matrix, std::size_t n_obs);

// a_ij = 1 iff i != j and matrix_ij >= theta.
AdjacencyMatrix threshold_filter(const SymMatrix& matrix, double theta);

// Smallest theta with edge density <= target_density, together with the
// density it achieves. Candidates are the distinct off-diagonal values; if
// even the largest value overshoots the target the boundary value is
// returned.
std::pair<double, double> suggest_threshold(const SymMatrix& matrix,
                                            double target_density);

} // namespace sigcd

#endif
