#ifndef SIGCD_COMMUNITY_HPP
#define SIGCD_COMMUNITY_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sigcd/panel.hpp"
#include "sigcd/spectral.hpp"

namespace sigcd {

enum class GainMode { configuration, rmt };

// Symmetric gain matrix B plus normalizer: modularity of a partition is
// (1/c_norm) * sum of B_ij over same-community ordered pairs, diagonal
// included (it is partition-independent).
struct GainMatrix {
  std::size_t n = 0;
  GainMode mode = GainMode::configuration;
  std::vector<double> b; // row-major n*n
  double c_norm = 0.0;

  double operator()(std::size_t i, std::size_t j) const { return b[i * n + j]; }
};

// Community assignment with contiguous indices 0..K-1.
struct Partition {
  std::vector<int> assignment;
  int k = 0;
  double q = 0.0;
};

// Modularity gains of the accepted moves/merges, in acceptance order.
// Starts from the singleton partition's q.
struct DetectionTrace {
  double initial_q = 0.0;
  std::vector<double> accepted_gains;
};

// B_ij = A_ij - k_i k_j / (2l), c_norm = 2l. Zero edges is an error.
GainMatrix gain_from_adjacency(const AdjacencyMatrix& adj);

// B = C^(g), c_norm = sum of the original matrix entries (must be > 0).
GainMatrix gain_from_rmt(const RmtSplit& split, const SymMatrix& original);

double modularity(const GainMatrix& gain, const std::vector<int>& assignment);

// Local moving in fixed ascending node order (or a seeded shuffle), then
// aggregation, repeated until a full pass moves nothing. Moves are accepted
// only when the gain exceeds 1e-12.
Partition louvain(const GainMatrix& gain,
                  std::optional<std::uint64_t> order_seed = std::nullopt,
                  DetectionTrace* trace = nullptr);

// Clauset-Newman-Moore agglomeration from singletons; the best pair merge is
// applied while its gain exceeds 1e-12, ties broken by the smallest index
// pair. Returns the best partition encountered.
Partition greedy_cnm(const GainMatrix& gain, DetectionTrace* trace = nullptr);

// Exact maximizer over all set partitions (restricted growth strings).
// Guarded to N <= 12. Ties resolve to the lexicographically largest growth
// string, so an all-zero B yields all singletons.
Partition brute_force_partition(const GainMatrix& gain);

// K x S contingency of communities against sector labels.
struct SectorOverlap {
  std::vector<std::string> sectors; // sorted labels, "Unknown" included if hit
  std::vector<std::vector<std::size_t>> counts; // [community][sector]
  std::vector<double> purity;                   // max sector share per community
};

SectorOverlap sector_overlap(const Partition& partition,
                             const SectorMap& sectors,
                             const std::vector<std::string>& tickers);

} // namespace sigcd

#endif
