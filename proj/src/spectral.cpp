#include "sigcd/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "sigcd/errors.hpp"

namespace sigcd {

namespace {

constexpr double kOffDiagTolerance = 1e-12;
constexpr int kMaxSweeps = 100;
constexpr double kSymmetryTolerance = 1e-10;
constexpr double kBucketTolerance = 1e-12;

double off_diagonal_norm(const std::vector<double>& a, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) sum += a[i * n + j] * a[i * n + j];
  return std::sqrt(2.0 * sum);
}

double frobenius_norm(const std::vector<double>& a) {
  double sum = 0.0;
  for (double v : a) sum += v * v;
  return std::sqrt(sum);
}

// Accumulate weight * v v^T for eigenvector column k.
void add_outer(std::vector<double>& out, const SpectralDecomposition& eig,
               std::size_t k, double weight) {
  const std::size_t n = eig.n;
  for (std::size_t i = 0; i < n; ++i) {
    const double vi = eig.vector(i, k) * weight;
    for (std::size_t j = 0; j < n; ++j)
      out[i * n + j] += vi * eig.vector(j, k);
  }
}

} // namespace

std::size_t AdjacencyMatrix::edge_count() const {
  std::size_t doubled = 0;
  for (std::uint8_t v : a) doubled += v;
  return doubled / 2;
}

std::vector<std::size_t> AdjacencyMatrix::degrees() const {
  std::vector<std::size_t> deg(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (a[i * n + j]) ++deg[i];
  return deg;
}

SpectralDecomposition eigh(const SymMatrix& matrix) {
  const std::size_t n = matrix.n;
  if (n == 0) throw std::invalid_argument("eigh: empty matrix");
  const double scale = std::max(1.0, frobenius_norm(matrix.a));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(matrix(i, j) - matrix(j, i)) > kSymmetryTolerance * scale)
        throw std::invalid_argument("eigh: matrix is not symmetric");

  std::vector<double> a = matrix.a;
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  int sweep = 0;
  for (; sweep < kMaxSweeps; ++sweep) {
    if (off_diagonal_norm(a, n) <= kOffDiagTolerance * scale) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double app = a[p * n + p];
        const double aqq = a[q * n + q];
        // Stable rotation (Golub & Van Loan): tan via the smaller root.
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0)
                             ? 1.0 / (theta + std::sqrt(1.0 + theta * theta))
                             : 1.0 / (theta - std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p];
          const double akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k];
          const double aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p];
          const double vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }
  if (off_diagonal_norm(a, n) > kOffDiagTolerance * scale && sweep >= kMaxSweeps)
    throw NumericError("eigh: Jacobi did not converge in 100 sweeps");

  // Sort descending; ties keep the lower original index first.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) {
                     return a[x * n + x] > a[y * n + y];
                   });

  SpectralDecomposition out;
  out.n = n;
  out.eigenvalues.resize(n);
  out.vectors.assign(n * n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    out.eigenvalues[k] = a[src * n + src];
    // Sign convention: the entry of largest magnitude is positive; the first
    // occurrence wins on magnitude ties.
    std::size_t arg = 0;
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double mag = std::abs(v[i * n + src]);
      if (mag > best) {
        best = mag;
        arg = i;
      }
    }
    const double flip = v[arg * n + src] < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i)
      out.vectors[i * n + k] = flip * v[i * n + src];
  }
  return out;
}

std::pair<double, double> mp_bounds(std::size_t n_series, std::size_t n_obs,
                                    double sigma2) {
  if (n_series < 2) throw std::invalid_argument("mp_bounds: need N >= 2");
  if (n_obs <= n_series)
    throw std::invalid_argument("mp_bounds: RMT regime requires T > N");
  if (sigma2 <= 0.0) throw std::invalid_argument("mp_bounds: sigma2 <= 0");
  const double q = static_cast<double>(n_obs) / static_cast<double>(n_series);
  const double root = std::sqrt(1.0 / q);
  const double lo = sigma2 * (1.0 - root) * (1.0 - root);
  const double hi = sigma2 * (1.0 + root) * (1.0 + root);
  return {lo, hi};
}

RmtSplit rmt_decompose(const SymMatrix& matrix, std::size_t n_obs) {
  const std::size_t n = matrix.n;
  if (n < 3) throw std::invalid_argument("rmt_decompose: need N >= 3");
  if (n_obs <= n)
    throw std::invalid_argument("rmt_decompose: RMT regime requires T > N");

  const SpectralDecomposition eig = eigh(matrix);

  RmtSplit split;
  split.n = n;
  split.eigenvalues = eig.eigenvalues;
  split.lambda_max = eig.eigenvalues[0];
  split.sigma2 = 1.0 - split.lambda_max / static_cast<double>(n);
  // A rank-one-dominated matrix drives lambda_max to N and sigma2 to a
  // rounding residue; anything this close to zero gets the fallback too.
  if (split.sigma2 <= 1e-12) {
    split.sigma2 = 1.0;
    split.sigma2_fallback = true;
  }
  std::tie(split.lambda_minus, split.lambda_plus) =
      mp_bounds(n, n_obs, split.sigma2);

  split.noise.assign(n * n, 0.0);
  split.market.assign(n * n, 0.0);
  split.structure.assign(n * n, 0.0);
  split.market_vector.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    split.market_vector[i] = eig.vector(i, 0);

  add_outer(split.market, eig, 0, split.lambda_max);
  for (std::size_t k = 1; k < n; ++k) {
    const double lambda = eig.eigenvalues[k];
    if (lambda <= split.lambda_plus + kBucketTolerance) {
      add_outer(split.noise, eig, k, lambda);
      ++split.noise_count;
    } else {
      add_outer(split.structure, eig, k, lambda);
      ++split.structure_count;
    }
  }
  return split;
}

AdjacencyMatrix threshold_filter(const SymMatrix& matrix, double theta) {
  AdjacencyMatrix adj;
  adj.n = matrix.n;
  adj.a.assign(matrix.n * matrix.n, 0);
  for (std::size_t i = 0; i < matrix.n; ++i)
    for (std::size_t j = 0; j < matrix.n; ++j)
      if (i != j && matrix(i, j) >= theta) adj.a[i * matrix.n + j] = 1;
  return adj;
}

std::pair<double, double> suggest_threshold(const SymMatrix& matrix,
                                            double target_density) {
  if (!(target_density > 0.0 && target_density < 1.0))
    throw std::invalid_argument("target_density must be in (0,1)");
  const std::size_t n = matrix.n;
  if (n < 2) throw std::invalid_argument("suggest_threshold: need N >= 2");

  std::vector<double> entries;
  entries.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) entries.push_back(matrix(i, j));
  std::sort(entries.begin(), entries.end());
  const double pairs = static_cast<double>(entries.size());

  // Walking distinct values upward, the first value whose keep-count meets
  // the target is the smallest admissible theta.
  for (std::size_t idx = 0; idx < entries.size(); ++idx) {
    if (idx > 0 && entries[idx] == entries[idx - 1]) continue;
    const double kept = pairs - static_cast<double>(idx);
    const double density = kept / pairs;
    if (density <= target_density) return {entries[idx], density};
  }
  // Even the largest distinct value keeps too many (massive ties): report
  // the boundary.
  const double top = entries.back();
  std::size_t kept = 0;
  for (double v : entries)
    if (v >= top) ++kept;
  return {top, static_cast<double>(kept) / pairs};
}

} // namespace sigcd
