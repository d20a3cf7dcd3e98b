#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "sigcd/errors.hpp"
#include "sigcd/rng.hpp"
#include "sigcd/signature.hpp"
#include "oracles.hpp"

using namespace sigcd;
using sigcd::testing::iterated_integrals_quadrature;
using sigcd::testing::random_path;
using sigcd::testing::random_stream;

namespace {

double coeff(const TruncatedSignature& sig, std::initializer_list<int> word) {
  std::vector<int> w(word);
  return sig.coefficient(w);
}

void check_close(double got, double want, double tol = 1e-12) {
  CHECK(std::abs(got - want) <= tol * std::max(1.0, std::abs(want)));
}

} // namespace

TEST_CASE("lead_lag construction rules") {
  const std::vector<double> up = {0.0, 1.0};
  const LeadLagPath path = lead_lag(up);
  REQUIRE(path.points.size() == 3);
  CHECK(path.points[0] == Point2{0.0, 0.0});
  CHECK(path.points[1] == Point2{1.0, 0.0});
  CHECK(path.points[2] == Point2{1.0, 1.0});

  const std::vector<double> loop = {0.0, 1.0, 0.0};
  const LeadLagPath closed = lead_lag(loop);
  REQUIRE(closed.points.size() == 5);
  CHECK(closed.points[1] == Point2{1.0, 0.0});
  CHECK(closed.points[2] == Point2{1.0, 1.0});
  CHECK(closed.points[3] == Point2{0.0, 1.0});
  CHECK(closed.points[4] == Point2{0.0, 0.0});

  const std::vector<double> flat = {0.0, 0.0, 0.0};
  for (const auto& p : lead_lag(flat).points) CHECK(p == Point2{0.0, 0.0});
}

TEST_CASE("lead_lag shape invariants") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto stream = random_stream(rng, 1 + trial);
    const LeadLagPath path = lead_lag(stream);
    REQUIRE(path.points.size() == 2 * (stream.size() - 1) + 1);
    CHECK(path.points.front() == Point2{0.0, 0.0});
    CHECK(path.points.back()[0] == path.points.back()[1]);
    for (std::size_t i = 1; i < path.points.size(); ++i) {
      const bool lead_moved = path.points[i][0] != path.points[i - 1][0];
      const bool lag_moved = path.points[i][1] != path.points[i - 1][1];
      CHECK_FALSE((lead_moved && lag_moved)); // axis-aligned staircase
    }
  }
}

TEST_CASE("lead_lag rejects bad streams") {
  CHECK_THROWS_AS(lead_lag(std::vector<double>{0.0}), std::invalid_argument);
  CHECK_THROWS_AS(lead_lag(std::vector<double>{1.0, 2.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(lead_lag(std::vector<double>{0.0, std::nan("")}), DataError);
}

TEST_CASE("segment_signature closed form") {
  const auto zero = segment_signature(std::vector<double>{0.0, 0.0}, 3);
  CHECK(coeff(zero, {}) == 1.0);
  for (int k = 1; k <= 3; ++k)
    for (double v : zero.level(k)) CHECK(v == 0.0);

  const auto sig12 = segment_signature(std::vector<double>{1.0, 2.0}, 2);
  CHECK(coeff(sig12, {1}) == 1.0);
  CHECK(coeff(sig12, {2}) == 2.0);
  CHECK(coeff(sig12, {1, 1}) == 0.5);
  CHECK(coeff(sig12, {1, 2}) == 1.0);
  CHECK(coeff(sig12, {2, 1}) == 1.0);
  CHECK(coeff(sig12, {2, 2}) == 2.0);

  const double a = 1.7;
  const auto axis = segment_signature(std::vector<double>{a, 0.0}, 3);
  check_close(coeff(axis, {1, 1, 1}), a * a * a / 6.0);
  CHECK(coeff(axis, {1, 2, 1}) == 0.0);
  CHECK(coeff(axis, {2, 2, 2}) == 0.0);
}

TEST_CASE("segment_signature level-k homogeneity in the increment") {
  Rng rng(11);
  const double lambda = 0.37;
  for (int trial = 0; trial < 10; ++trial) {
    const std::vector<double> delta = {2.0 * rng.uniform() - 1.0,
                                       2.0 * rng.uniform() - 1.0};
    const std::vector<double> scaled = {lambda * delta[0], lambda * delta[1]};
    const auto base = segment_signature(delta, 4);
    const auto grown = segment_signature(scaled, 4);
    for (int k = 1; k <= 4; ++k) {
      const double factor = std::pow(lambda, k);
      for (std::size_t w = 0; w < base.level(k).size(); ++w)
        check_close(grown.level(k)[w], factor * base.level(k)[w]);
    }
  }
}

TEST_CASE("chen_concat identity element and dimension checks") {
  const auto sig = segment_signature(std::vector<double>{0.4, -0.3}, 3);
  const auto id = TruncatedSignature::identity(2, 3);
  const auto left = chen_concat(id, sig);
  const auto right = chen_concat(sig, id);
  for (int k = 1; k <= 3; ++k)
    for (std::size_t w = 0; w < sig.level(k).size(); ++w) {
      CHECK(left.level(k)[w] == sig.level(k)[w]);
      CHECK(right.level(k)[w] == sig.level(k)[w]);
    }

  const auto other_depth = TruncatedSignature::identity(2, 2);
  CHECK_THROWS_AS(chen_concat(sig, other_depth), std::invalid_argument);
  const auto other_dim = TruncatedSignature::identity(3, 3);
  CHECK_THROWS_AS(chen_concat(sig, other_dim), std::invalid_argument);
}

TEST_CASE("chen_concat of unit axis segments") {
  const auto first = segment_signature(std::vector<double>{1.0, 0.0}, 2);
  const auto second = segment_signature(std::vector<double>{0.0, 1.0}, 2);
  const auto sig = chen_concat(first, second);
  CHECK(coeff(sig, {1}) == 1.0);
  CHECK(coeff(sig, {2}) == 1.0);
  CHECK(coeff(sig, {1, 1}) == 0.5);
  CHECK(coeff(sig, {1, 2}) == 1.0);
  CHECK(coeff(sig, {2, 1}) == 0.0);
  CHECK(coeff(sig, {2, 2}) == 0.5);

  // Same path through the quadrature oracle.
  const std::vector<Point2> pts = {{0, 0}, {1, 0}, {1, 1}};
  const auto oracle = iterated_integrals_quadrature(pts, 2);
  for (int k = 1; k <= 2; ++k)
    for (std::size_t w = 0; w < oracle[static_cast<std::size_t>(k) - 1].size(); ++w)
      check_close(sig.level(k)[w], oracle[static_cast<std::size_t>(k) - 1][w], 1e-10);
}

TEST_CASE("path concatenated with its reversal is the identity") {
  Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const auto pts = random_path(rng, 12);
    std::vector<Point2> reversed(pts.rbegin(), pts.rend());
    const auto sig = path_signature(std::span<const Point2>(pts), 3);
    const auto back = path_signature(std::span<const Point2>(reversed), 3);
    const auto round = chen_concat(sig, back);
    for (int k = 1; k <= 3; ++k)
      for (double v : round.level(k)) CHECK(std::abs(v) <= 1e-12 * 64.0);
  }
}

TEST_CASE("path_signature on the unit lead-lag step") {
  const auto sig = path_signature(lead_lag(std::vector<double>{0.0, 1.0}), 2);
  CHECK(coeff(sig, {1}) == 1.0);
  CHECK(coeff(sig, {2}) == 1.0);
  CHECK(coeff(sig, {1, 1}) == 0.5);
  CHECK(coeff(sig, {1, 2}) == 1.0);
  CHECK(coeff(sig, {2, 1}) == 0.0);
  CHECK(coeff(sig, {2, 2}) == 0.5);
}

TEST_CASE("constant path has the identity signature") {
  const auto sig = path_signature(lead_lag(std::vector<double>{0.0, 0.0, 0.0}), 3);
  for (int k = 1; k <= 3; ++k)
    for (double v : sig.level(k)) CHECK(v == 0.0);
}

TEST_CASE("path_signature rejects degenerate paths") {
  LeadLagPath degenerate;
  degenerate.points = {{0.0, 0.0}};
  CHECK_THROWS_AS(path_signature(degenerate, 2), std::invalid_argument);
}

TEST_CASE("path_signature matches the quadrature oracle") {
  Rng rng(101);
  for (int trial = 0; trial < 25; ++trial) {
    const auto pts = random_path(rng, 5 + static_cast<std::size_t>(rng.bounded(10)));
    const auto sig = path_signature(std::span<const Point2>(pts), 3);
    const auto oracle = iterated_integrals_quadrature(pts, 3);
    for (int k = 1; k <= 3; ++k)
      for (std::size_t w = 0; w < oracle[static_cast<std::size_t>(k) - 1].size(); ++w)
        check_close(sig.level(k)[w], oracle[static_cast<std::size_t>(k) - 1][w], 1e-9);
  }
}

TEST_CASE("chen identity across random split points") {
  Rng rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    const auto pts = random_path(rng, 4 + static_cast<std::size_t>(rng.bounded(20)));
    const std::size_t cut = 1 + static_cast<std::size_t>(rng.bounded(pts.size() - 2));
    const std::vector<Point2> head(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(cut) + 1);
    const std::vector<Point2> tail(pts.begin() + static_cast<std::ptrdiff_t>(cut), pts.end());
    const auto whole = path_signature(std::span<const Point2>(pts), 3);
    const auto glued = chen_concat(path_signature(std::span<const Point2>(head), 3),
                                   path_signature(std::span<const Point2>(tail), 3));
    for (int k = 1; k <= 3; ++k)
      for (std::size_t w = 0; w < whole.level(k).size(); ++w)
        check_close(glued.level(k)[w], whole.level(k)[w]);
  }
}

TEST_CASE("reparameterization invariance under collinear insertions") {
  Rng rng(37);
  for (int trial = 0; trial < 25; ++trial) {
    const auto pts = random_path(rng, 3 + static_cast<std::size_t>(rng.bounded(12)));
    std::vector<Point2> refined;
    for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
      refined.push_back(pts[s]);
      const double t = 0.1 + 0.8 * rng.uniform();
      refined.push_back({pts[s][0] + t * (pts[s + 1][0] - pts[s][0]),
                         pts[s][1] + t * (pts[s + 1][1] - pts[s][1])});
    }
    refined.push_back(pts.back());
    const auto base = path_signature(std::span<const Point2>(pts), 3);
    const auto fine = path_signature(std::span<const Point2>(refined), 3);
    for (int k = 1; k <= 3; ++k)
      for (std::size_t w = 0; w < base.level(k).size(); ++w)
        check_close(fine.level(k)[w], base.level(k)[w]);
  }
}

TEST_CASE("level-1 coefficients equal the total increment") {
  Rng rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    const auto pts = random_path(rng, 8);
    const auto sig = path_signature(std::span<const Point2>(pts), 3);
    CHECK(sig.level(1)[0] == doctest::Approx(pts.back()[0] - pts.front()[0]).epsilon(1e-12));
    CHECK(sig.level(1)[1] == doctest::Approx(pts.back()[1] - pts.front()[1]).epsilon(1e-12));
  }
}

TEST_CASE("lead-lag Levy area is half the quadratic variation") {
  Rng rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const auto stream = random_stream(rng, 3 + static_cast<std::size_t>(rng.bounded(40)));
    double qv = 0.0;
    for (std::size_t i = 1; i < stream.size(); ++i) {
      const double d = stream[i] - stream[i - 1];
      qv += d * d;
    }
    const auto sig = path_signature(lead_lag(stream), 2);
    const double area =
        0.5 * (coeff(sig, {1, 2}) - coeff(sig, {2, 1}));
    check_close(area, 0.5 * qv);
  }
}

TEST_CASE("feature vector layout") {
  const auto sig = path_signature(lead_lag(std::vector<double>{0.0, 1.0, 0.5}), 3);
  const auto features = signature_feature_vector(sig);
  REQUIRE(features.size() == 14); // (2^4 - 1)/(2 - 1) - 1
  CHECK(sig.total_coefficient_count() == 15);
  CHECK(features[0] == coeff(sig, {1}));
  CHECK(features[1] == coeff(sig, {2}));
  CHECK(features[2] == coeff(sig, {1, 1}));
  CHECK(features[5] == coeff(sig, {2, 2}));
  CHECK(features[6] == coeff(sig, {1, 1, 1}));
  CHECK(features[13] == coeff(sig, {2, 2, 2}));

  const auto id = TruncatedSignature::identity(2, 3);
  for (double v : signature_feature_vector(id)) CHECK(v == 0.0);

  const auto m1 = path_signature(lead_lag(std::vector<double>{0.0, 2.0}), 1);
  const auto f1 = signature_feature_vector(m1);
  REQUIRE(f1.size() == 2);
  CHECK(f1[0] == 2.0);
  CHECK(f1[1] == 2.0);
}

TEST_CASE("word rendering") {
  CHECK(TruncatedSignature::word_string(3, 0b010, 2) == "121");
  CHECK(TruncatedSignature::word_string(1, 1, 2) == "2");
  CHECK(TruncatedSignature::word_string(2, 3, 2) == "22");
}
