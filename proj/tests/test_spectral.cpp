#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "sigcd/rng.hpp"
#include "sigcd/similarity.hpp"
#include "sigcd/spectral.hpp"
#include "oracles.hpp"

using namespace sigcd;
using sigcd::testing::determinant_cofactor;

namespace {

SymMatrix sym_from(const std::vector<double>& entries, std::size_t n,
                   MatrixKind kind = MatrixKind::correlation) {
  SymMatrix m;
  m.n = n;
  m.kind = kind;
  m.a = entries;
  return m;
}

SymMatrix random_correlation(Rng& rng, std::size_t n, std::size_t t) {
  ReturnsPanel panel;
  for (std::size_t i = 0; i < n; ++i)
    panel.tickers.push_back("S" + std::to_string(i));
  for (std::size_t j = 0; j < t; ++j)
    panel.timestamps.push_back("d" + std::to_string(j));
  panel.values.resize(n * t);
  for (auto& v : panel.values) v = rng.normal();
  return correlation_matrix(panel);
}

double reconstruction_error(const SymMatrix& matrix,
                            const SpectralDecomposition& eig) {
  const std::size_t n = matrix.n;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double rebuilt = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        rebuilt += eig.eigenvalues[k] * eig.vector(i, k) * eig.vector(j, k);
      const double d = rebuilt - matrix(i, j);
      num += d * d;
      den += matrix(i, j) * matrix(i, j);
    }
  return std::sqrt(num) / std::max(1e-300, std::sqrt(den));
}

} // namespace

TEST_CASE("eigh on small closed-form matrices") {
  const SymMatrix identity =
      sym_from({1, 0, 0, 0, 1, 0, 0, 0, 1}, 3);
  const auto eye = eigh(identity);
  for (double v : eye.eigenvalues) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));

  const SymMatrix two = sym_from({2, 1, 1, 2}, 2);
  const auto pair = eigh(two);
  CHECK(pair.eigenvalues[0] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(pair.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-14));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(pair.vector(0, 0) == doctest::Approx(inv_sqrt2).epsilon(1e-12));
  CHECK(pair.vector(1, 0) == doctest::Approx(inv_sqrt2).epsilon(1e-12));
  CHECK(pair.vector(0, 1) == doctest::Approx(inv_sqrt2).epsilon(1e-12));
  CHECK(pair.vector(1, 1) == doctest::Approx(-inv_sqrt2).epsilon(1e-12));

  const SymMatrix diag = sym_from({5, 0, 0, 0, 2, 0, 0, 0, -1}, 3);
  const auto sorted = eigh(diag);
  CHECK(sorted.eigenvalues[0] == doctest::Approx(5.0));
  CHECK(sorted.eigenvalues[1] == doctest::Approx(2.0));
  CHECK(sorted.eigenvalues[2] == doctest::Approx(-1.0));
}

TEST_CASE("eigh rejects non-symmetric input") {
  const SymMatrix bad = sym_from({1, 0.5, 0.2, 1}, 2);
  CHECK_THROWS_AS(eigh(bad), std::invalid_argument);
}

TEST_CASE("eigh invariants on random symmetric matrices") {
  Rng rng(17);
  for (std::size_t n : {2u, 3u, 4u, 5u}) {
    for (int trial = 0; trial < 5; ++trial) {
      SymMatrix m;
      m.n = n;
      m.a.assign(n * n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
          const double v = 2.0 * rng.uniform() - 1.0;
          m.at(i, j) = v;
          m.at(j, i) = v;
        }
      const auto eig = eigh(m);

      double trace = 0.0, eig_sum = 0.0, eig_prod = 1.0;
      for (std::size_t i = 0; i < n; ++i) trace += m(i, i);
      for (double v : eig.eigenvalues) {
        eig_sum += v;
        eig_prod *= v;
      }
      CHECK(std::abs(eig_sum - trace) <= 1e-10);
      CHECK(std::abs(eig_prod - determinant_cofactor(m.a, n)) <= 1e-10);
      CHECK(reconstruction_error(m, eig) <= 1e-10);

      // Orthonormal columns.
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
          double dot = 0.0;
          for (std::size_t i = 0; i < n; ++i)
            dot += eig.vector(i, a) * eig.vector(i, b);
          CHECK(std::abs(dot - (a == b ? 1.0 : 0.0)) <= 1e-10);
        }
      // Sign convention: largest-magnitude entry positive.
      for (std::size_t k = 0; k < n; ++k) {
        double best = 0.0, entry = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          if (std::abs(eig.vector(i, k)) > best) {
            best = std::abs(eig.vector(i, k));
            entry = eig.vector(i, k);
          }
        CHECK(entry > 0.0);
      }
    }
  }
}

TEST_CASE("mp_bounds closed forms") {
  const auto [lo, hi] = mp_bounds(100, 400, 1.0); // Q = 4
  CHECK(lo == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(hi == doctest::Approx(2.25).epsilon(1e-14));

  const auto [lo_inf, hi_inf] = mp_bounds(2, 2'000'000'000ULL, 1.0);
  CHECK(std::abs(lo_inf - 1.0) < 1e-4);
  CHECK(std::abs(hi_inf - 1.0) < 1e-4);

  // Benchmark run: N=443, T=3719, sigma2 = 1 - 174/443.
  const double sigma2 = 1.0 - 174.0 / 443.0;
  const auto [lo_sp, hi_sp] = mp_bounds(443, 3719, sigma2);
  const double root = std::sqrt(443.0 / 3719.0);
  CHECK(hi_sp == doctest::Approx(sigma2 * (1 + root) * (1 + root)).epsilon(1e-15));
  CHECK(hi_sp == doctest::Approx(1.099).epsilon(5e-4));
  CHECK(lo_sp < hi_sp);

  CHECK_THROWS_AS(mp_bounds(100, 100, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(mp_bounds(100, 50, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(mp_bounds(100, 400, 0.0), std::invalid_argument);
}

TEST_CASE("rmt_decompose buckets a planted one-spike spectrum") {
  // Equicorrelated matrix: eigenvalues 1+(N-1)rho once and (1-rho) repeated.
  const std::size_t n = 11;
  const double rho = 0.5;
  SymMatrix m;
  m.n = n;
  m.a.assign(n * n, rho);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;

  const RmtSplit split = rmt_decompose(m, 1100); // Q = 100
  CHECK(split.lambda_max == doctest::Approx(6.0).epsilon(1e-12));
  // sigma2 = 1 - 6/11; band = sigma2 (1 +- 0.1)^2 contains 0.5.
  CHECK_FALSE(split.sigma2_fallback);
  CHECK(split.lambda_minus < 0.5);
  CHECK(split.lambda_plus > 0.5);
  CHECK(split.noise_count == n - 1);
  CHECK(split.structure_count == 0);
  for (double v : split.structure) CHECK(std::abs(v) <= 1e-12);
  const double expected_market = 6.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      CHECK(split.market[i * n + j] ==
            doctest::Approx(expected_market).epsilon(1e-10));
}

TEST_CASE("rmt_decompose falls back to sigma2 = 1 on a pure market matrix") {
  // All-ones similarity: lambda_max = N, so 1 - lambda_max/N collapses to 0.
  const std::size_t n = 6;
  SymMatrix ones;
  ones.n = n;
  ones.kind = MatrixKind::similarity_ed;
  ones.a.assign(n * n, 1.0);
  const RmtSplit split = rmt_decompose(ones, 120);
  CHECK(split.sigma2_fallback);
  CHECK(split.sigma2 == 1.0);
  CHECK(split.lambda_max == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(split.structure_count == 0);
  CHECK(split.noise_count == n - 1);
  for (std::size_t i = 0; i < n * n; ++i) {
    CHECK(split.market[i] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(split.structure[i]) <= 1e-10);
  }
}

TEST_CASE("rmt_decompose reconstruction and market removal") {
  Rng rng(29);
  for (int trial = 0; trial < 5; ++trial) {
    const SymMatrix corr = random_correlation(rng, 20, 60);
    const RmtSplit split = rmt_decompose(corr, 60);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < corr.a.size(); ++i) {
      const double rebuilt =
          split.noise[i] + split.market[i] + split.structure[i];
      const double d = rebuilt - corr.a[i];
      num += d * d;
      den += corr.a[i] * corr.a[i];
    }
    CHECK(std::sqrt(num / den) <= 1e-10);

    // The market direction is absent from the structure component.
    double residual = 0.0;
    for (std::size_t i = 0; i < corr.n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < corr.n; ++j)
        row += split.structure[i * corr.n + j] * split.market_vector[j];
      residual += row * row;
    }
    CHECK(std::sqrt(residual) <= 1e-8);

    // Components are mutually orthogonal under the trace inner product.
    const auto dot = [&](const std::vector<double>& x,
                         const std::vector<double>& y) {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
      return s;
    };
    CHECK(std::abs(dot(split.noise, split.market)) <= 1e-8);
    CHECK(std::abs(dot(split.noise, split.structure)) <= 1e-8);
    CHECK(std::abs(dot(split.market, split.structure)) <= 1e-8);
  }
}

TEST_CASE("rmt_decompose guards") {
  Rng rng(31);
  const SymMatrix small = random_correlation(rng, 2, 30);
  CHECK_THROWS_AS(rmt_decompose(small, 30), std::invalid_argument);
  const SymMatrix square = random_correlation(rng, 10, 40);
  CHECK_THROWS_AS(rmt_decompose(square, 10), std::invalid_argument);
}

TEST_CASE("marcenko-pastur coverage on white panels") {
  Rng rng(37);
  double covered = 0.0, total = 0.0;
  for (int seed = 0; seed < 5; ++seed) {
    const SymMatrix corr = random_correlation(rng, 50, 500);
    const auto eig = eigh(corr);
    const auto [lo, hi] = mp_bounds(50, 500, 1.0);
    for (double lambda : eig.eigenvalues) {
      total += 1.0;
      if (lambda >= lo && lambda <= hi) covered += 1.0;
    }
  }
  CHECK(covered / total >= 0.98);
}

TEST_CASE("threshold_filter boundary semantics") {
  const SymMatrix m = sym_from({1.0, 0.5, 0.5, 1.0}, 2);
  const AdjacencyMatrix none = threshold_filter(m, 0.6);
  CHECK(none.edge_count() == 0);
  const AdjacencyMatrix one = threshold_filter(m, 0.5);
  CHECK(one.edge_count() == 1);
  CHECK(one.edge(0, 1));
  CHECK_FALSE(one.edge(0, 0)); // diagonal never links
  const auto degrees = one.degrees();
  CHECK(degrees[0] == 1);
}

TEST_CASE("threshold_filter is monotone in theta") {
  Rng rng(41);
  const SymMatrix corr = random_correlation(rng, 12, 80);
  const AdjacencyMatrix loose = threshold_filter(corr, 0.05);
  const AdjacencyMatrix tight = threshold_filter(corr, 0.2);
  for (std::size_t i = 0; i < corr.a.size(); ++i)
    if (tight.a[i]) CHECK(loose.a[i]);
}

TEST_CASE("suggest_threshold picks the smallest admissible value") {
  // Distinct entries {0.1, 0.2, 0.3}: only theta=0.3 reaches density 1/3.
  SymMatrix m = sym_from({1.0, 0.1, 0.2, 0.1, 1.0, 0.3, 0.2, 0.3, 1.0}, 3);
  const auto [theta, density] = suggest_threshold(m, 1.0 / 3.0);
  CHECK(theta == doctest::Approx(0.3));
  CHECK(density == doctest::Approx(1.0 / 3.0));

  // All entries tied: no admissible value; the boundary is reported.
  SymMatrix tied = sym_from({1.0, 0.3, 0.3, 0.3, 1.0, 0.3, 0.3, 0.3, 1.0}, 3);
  const auto [tied_theta, tied_density] = suggest_threshold(tied, 0.5);
  CHECK(tied_theta == doctest::Approx(0.3));
  CHECK(tied_density == doctest::Approx(1.0));

  // Near target 1 the suggestion converges onto the bottom of the entry
  // range (the smallest value with density strictly below 1).
  const auto [near_theta, near_density] = suggest_threshold(m, 0.999);
  CHECK(near_theta == doctest::Approx(0.2));
  CHECK(near_density == doctest::Approx(2.0 / 3.0));

  CHECK_THROWS_AS(suggest_threshold(m, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(suggest_threshold(m, 1.0), std::invalid_argument);

  // Consistency: filtering at the suggested theta realizes the density.
  Rng rng(43);
  const SymMatrix corr = random_correlation(rng, 15, 90);
  const auto [t2, d2] = suggest_threshold(corr, 0.25);
  const AdjacencyMatrix adj = threshold_filter(corr, t2);
  const double pairs = 15.0 * 14.0 / 2.0;
  CHECK(static_cast<double>(adj.edge_count()) / pairs ==
        doctest::Approx(d2).epsilon(1e-12));
  CHECK(d2 <= 0.25);
}
