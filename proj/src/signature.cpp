#include "sigcd/signature.hpp"

#include <cmath>
#include <stdexcept>

#include "sigcd/errors.hpp"

namespace sigcd {

namespace {

std::size_t pow_size(int base, int exp) {
  std::size_t out = 1;
  for (int i = 0; i < exp; ++i) out *= static_cast<std::size_t>(base);
  return out;
}

} // namespace

TruncatedSignature::TruncatedSignature(int dim, int depth)
    : dim_(dim), depth_(depth) {
  if (dim < 1) throw std::invalid_argument("signature dimension must be >= 1");
  if (depth < 1) throw std::invalid_argument("signature depth must be >= 1");
  levels_.resize(static_cast<std::size_t>(depth));
  for (int k = 1; k <= depth; ++k)
    levels_[k - 1].assign(pow_size(dim, k), 0.0);
}

TruncatedSignature TruncatedSignature::identity(int dim, int depth) {
  return TruncatedSignature(dim, depth);
}

std::size_t TruncatedSignature::total_coefficient_count() const {
  std::size_t count = 1;
  for (int k = 1; k <= depth_; ++k) count += levels_[k - 1].size();
  return count;
}

std::size_t TruncatedSignature::word_index(int dim,
                                           std::span<const int> word) {
  std::size_t index = 0;
  for (int letter : word) {
    if (letter < 1 || letter > dim)
      throw std::invalid_argument("word letter out of range");
    index = index * static_cast<std::size_t>(dim) +
            static_cast<std::size_t>(letter - 1);
  }
  return index;
}

std::string TruncatedSignature::word_string(int k, std::size_t index,
                                            int dim) {
  std::string out(static_cast<std::size_t>(k), '1');
  for (int pos = k - 1; pos >= 0; --pos) {
    out[static_cast<std::size_t>(pos)] =
        static_cast<char>('1' + index % static_cast<std::size_t>(dim));
    index /= static_cast<std::size_t>(dim);
  }
  return out;
}

double TruncatedSignature::coefficient(std::span<const int> word) const {
  const int k = static_cast<int>(word.size());
  if (k == 0) return 1.0;
  if (k > depth_) throw std::invalid_argument("word longer than depth");
  return levels_[k - 1][word_index(dim_, word)];
}

void TruncatedSignature::assign_segment_exponential(
    std::span<const double> increment) {
  if (static_cast<int>(increment.size()) != dim_)
    throw std::invalid_argument("increment dimension mismatch");
  for (double x : increment)
    if (!std::isfinite(x)) throw DataError("non-finite segment increment");

  auto& first = levels_[0];
  for (int i = 0; i < dim_; ++i) first[static_cast<std::size_t>(i)] = increment[static_cast<std::size_t>(i)];
  for (int k = 2; k <= depth_; ++k) {
    const auto& prev = levels_[k - 2];
    auto& cur = levels_[k - 1];
    const double inv = 1.0 / static_cast<double>(k);
    std::size_t at = 0;
    for (double p : prev)
      for (int i = 0; i < dim_; ++i)
        cur[at++] = p * increment[static_cast<std::size_t>(i)] * inv;
  }
}

void TruncatedSignature::concat_inplace(const TruncatedSignature& rhs) {
  if (rhs.dim_ != dim_ || rhs.depth_ != depth_)
    throw std::invalid_argument("chen_concat: dimension or depth mismatch");
  // Coefficient of w becomes sum over splits w = u.v of this(u)*rhs(v).
  // Descending level order: level L only reads strictly lower levels of
  // *this, which are still the pre-product values.
  for (int level = depth_; level >= 1; --level) {
    auto& dest = levels_[level - 1];
    for (int left = level - 1; left >= 1; --left) {
      const int right = level - left;
      const auto& lhs_level = levels_[left - 1];
      const auto& rhs_level = rhs.levels_[right - 1];
      std::size_t at = 0;
      for (double l : lhs_level)
        for (double r : rhs_level) dest[at++] += l * r;
    }
    const auto& rhs_level = rhs.levels_[level - 1];
    for (std::size_t i = 0; i < dest.size(); ++i) dest[i] += rhs_level[i];
  }
}

LeadLagPath lead_lag(std::span<const double> stream) {
  if (stream.size() < 2)
    throw std::invalid_argument("lead_lag: stream needs at least two values");
  for (double x : stream)
    if (!std::isfinite(x)) throw DataError("lead_lag: non-finite stream value");
  if (stream[0] != 0.0)
    throw std::invalid_argument("lead_lag: stream must start at 0");

  const std::size_t n = stream.size() - 1;
  LeadLagPath path;
  path.points.reserve(2 * n + 1);
  path.points.push_back({stream[0], stream[0]});
  for (std::size_t j = 0; j < n; ++j) {
    path.points.push_back({stream[j + 1], stream[j]});
    path.points.push_back({stream[j + 1], stream[j + 1]});
  }
  return path;
}

TruncatedSignature segment_signature(std::span<const double> increment,
                                     int depth) {
  TruncatedSignature sig(static_cast<int>(increment.size()), depth);
  sig.assign_segment_exponential(increment);
  return sig;
}

TruncatedSignature chen_concat(const TruncatedSignature& first,
                               const TruncatedSignature& second) {
  TruncatedSignature out = first;
  out.concat_inplace(second);
  return out;
}

TruncatedSignature path_signature(std::span<const Point2> points, int depth) {
  if (points.size() < 2)
    throw std::invalid_argument("path_signature: degenerate path");
  TruncatedSignature sig(2, depth);
  TruncatedSignature segment(2, depth);
  std::array<double, 2> delta{points[1][0] - points[0][0],
                              points[1][1] - points[0][1]};
  sig.assign_segment_exponential(delta);
  for (std::size_t i = 2; i < points.size(); ++i) {
    delta = {points[i][0] - points[i - 1][0], points[i][1] - points[i - 1][1]};
    segment.assign_segment_exponential(delta);
    sig.concat_inplace(segment);
  }
  return sig;
}

TruncatedSignature path_signature(const LeadLagPath& path, int depth) {
  return path_signature(std::span<const Point2>(path.points), depth);
}

std::vector<double> signature_feature_vector(const TruncatedSignature& sig) {
  std::vector<double> out;
  out.reserve(sig.total_coefficient_count() - 1);
  for (int k = 1; k <= sig.depth(); ++k) {
    const auto level = sig.level(k);
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

} // namespace sigcd
