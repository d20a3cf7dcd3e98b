#ifndef SIGCD_SIGNATURE_HPP
#define SIGCD_SIGNATURE_HPP

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sigcd {

using Point2 = std::array<double, 2>;

// Axis-aligned staircase path produced by the lead-lag embedding of a scalar
// stream. Points are (lead, lag); a stream of n+1 values yields 2n+1 points,
// starting at the origin and ending on the diagonal.
struct LeadLagPath {
  std::vector<Point2> points;
};

// Word-indexed tensor coefficients of a path signature truncated at tensor
// level `depth`. Level k is stored flat with d^k entries in lexicographic
// word order over the alphabet {1..d}; the level-0 coefficient (empty word)
// is identically 1 and is not stored.
class TruncatedSignature {
public:
  TruncatedSignature(int dim, int depth);

  // Identity of the tensor group: empty word 1, everything else 0.
  static TruncatedSignature identity(int dim, int depth);

  int dim() const { return dim_; }
  int depth() const { return depth_; }

  // Including the empty word: (d^(M+1) - 1)/(d - 1).
  std::size_t total_coefficient_count() const;

  std::span<const double> level(int k) const { return levels_[k - 1]; }
  std::span<double> level(int k) { return levels_[k - 1]; }

  // Coefficient of a word given as letters in 1..d; the empty word yields 1.
  double coefficient(std::span<const int> word) const;

  // Overwrites this with the tensor exponential of a straight segment:
  // the word w = (w_1..w_k) gets increment[w_1]*...*increment[w_k] / k!.
  void assign_segment_exponential(std::span<const double> increment);

  // Chen product: this becomes the signature of this path followed by rhs's
  // path. Works downward per level so it is safe in place.
  void concat_inplace(const TruncatedSignature& rhs);

  // Index of a word within its level (lexicographic).
  static std::size_t word_index(int dim, std::span<const int> word);
  // Digit-string rendering, e.g. {1,2,1} -> "121".
  static std::string word_string(int k, std::size_t index, int dim);

private:
  int dim_;
  int depth_;
  std::vector<std::vector<double>> levels_; // levels_[k-1] holds level k
};

// Lead-lag embedding. The stream must start at 0 (callers pass cumulative
// sums of returns re-based at 0), have at least two values, and be finite.
LeadLagPath lead_lag(std::span<const double> stream);

TruncatedSignature segment_signature(std::span<const double> increment,
                                     int depth);

TruncatedSignature chen_concat(const TruncatedSignature& first,
                               const TruncatedSignature& second);

// Left fold of chen_concat over the segment signatures of consecutive
// increments, in path order.
TruncatedSignature path_signature(const LeadLagPath& path, int depth);
TruncatedSignature path_signature(std::span<const Point2> points, int depth);

// All coefficients of word length 1..M in level order, lexicographic within
// each level; the constant empty-word term is excluded.
std::vector<double> signature_feature_vector(const TruncatedSignature& sig);

} // namespace sigcd

#endif
