#include "sigcd/community.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "sigcd/errors.hpp"
#include "sigcd/rng.hpp"

namespace sigcd {

namespace {

constexpr double kMoveThreshold = 1e-12;

// Contiguous community ids 0..K-1 in order of first appearance.
int normalize_assignment(std::vector<int>& assignment) {
  std::map<int, int> relabel;
  for (int& a : assignment) {
    const auto [it, inserted] =
        relabel.emplace(a, static_cast<int>(relabel.size()));
    a = it->second;
    (void)inserted;
  }
  return static_cast<int>(relabel.size());
}

double singleton_modularity(const GainMatrix& gain) {
  double sum = 0.0;
  for (std::size_t i = 0; i < gain.n; ++i) sum += gain(i, i);
  return sum / gain.c_norm;
}

// One level of Louvain local moving over an m x m aggregate matrix.
// Returns true when at least one move was accepted.
bool local_move(const std::vector<double>& b, std::size_t m, double c_norm,
                std::vector<int>& comm, const std::vector<std::size_t>& order,
                DetectionTrace* trace) {
  std::vector<std::size_t> size(m, 1);
  std::vector<double> affinity(m, 0.0);
  bool changed_any = false;
  bool moved = true;
  while (moved) {
    moved = false;
    for (const std::size_t i : order) {
      std::fill(affinity.begin(), affinity.end(), 0.0);
      for (std::size_t j = 0; j < m; ++j)
        if (j != i) affinity[static_cast<std::size_t>(comm[j])] += b[i * m + j];

      const int cur = comm[i];
      const double base = affinity[static_cast<std::size_t>(cur)];
      int best = cur;
      double best_gain = 0.0;
      for (std::size_t c = 0; c < m; ++c) {
        if (static_cast<int>(c) == cur) continue;
        if (size[c] == 0) continue;
        const double gain = affinity[c] - base;
        if (gain > best_gain) {
          best_gain = gain;
          best = static_cast<int>(c);
        }
      }
      const double delta_q = 2.0 * best_gain / c_norm;
      if (best != cur && delta_q > kMoveThreshold) {
        --size[static_cast<std::size_t>(cur)];
        ++size[static_cast<std::size_t>(best)];
        comm[i] = best;
        if (trace) trace->accepted_gains.push_back(delta_q);
        moved = true;
        changed_any = true;
      }
    }
  }
  return changed_any;
}

} // namespace

GainMatrix gain_from_adjacency(const AdjacencyMatrix& adj) {
  const std::size_t n = adj.n;
  const std::size_t links = adj.edge_count();
  if (links == 0)
    throw DataError("modularity undefined: graph has no edges");
  const double two_l = 2.0 * static_cast<double>(links);
  const auto degrees = adj.degrees();

  GainMatrix gain;
  gain.n = n;
  gain.mode = GainMode::configuration;
  gain.c_norm = two_l;
  gain.b.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double expected = static_cast<double>(degrees[i]) *
                              static_cast<double>(degrees[j]) / two_l;
      gain.b[i * n + j] = (i != j && adj.edge(i, j) ? 1.0 : 0.0) - expected;
    }
  return gain;
}

GainMatrix gain_from_rmt(const RmtSplit& split, const SymMatrix& original) {
  if (split.n != original.n)
    throw std::invalid_argument("gain_from_rmt: split does not match matrix");
  const double c_norm = original.total_sum();
  if (c_norm <= 0.0)
    throw DataError("gain_from_rmt: C_norm <= 0");

  GainMatrix gain;
  gain.n = split.n;
  gain.mode = GainMode::rmt;
  gain.c_norm = c_norm;
  gain.b = split.structure;
  return gain;
}

double modularity(const GainMatrix& gain, const std::vector<int>& assignment) {
  if (assignment.size() != gain.n)
    throw std::invalid_argument("modularity: assignment length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < gain.n; ++i)
    for (std::size_t j = 0; j < gain.n; ++j)
      if (assignment[i] == assignment[j]) sum += gain(i, j);
  return sum / gain.c_norm;
}

Partition louvain(const GainMatrix& gain,
                  std::optional<std::uint64_t> order_seed,
                  DetectionTrace* trace) {
  const std::size_t n = gain.n;
  if (n == 0) throw std::invalid_argument("louvain: empty gain matrix");
  if (trace) {
    trace->initial_q = singleton_modularity(gain);
    trace->accepted_gains.clear();
  }

  std::optional<Rng> rng;
  if (order_seed) rng.emplace(*order_seed);

  std::vector<double> b = gain.b;
  std::size_t m = n;
  std::vector<int> node_to_comm(n);
  std::iota(node_to_comm.begin(), node_to_comm.end(), 0);

  while (true) {
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    if (rng) rng->shuffle(order);

    std::vector<int> comm(m);
    std::iota(comm.begin(), comm.end(), 0);
    if (!local_move(b, m, gain.c_norm, comm, order, trace)) break;

    const int k = normalize_assignment(comm);
    // Aggregate by community-block sums; c_norm is unchanged so modularity
    // values carry over exactly.
    std::vector<double> next(static_cast<std::size_t>(k) *
                                 static_cast<std::size_t>(k),
                             0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        next[static_cast<std::size_t>(comm[i]) * static_cast<std::size_t>(k) +
             static_cast<std::size_t>(comm[j])] += b[i * m + j];
    b = std::move(next);
    for (int& c : node_to_comm) c = comm[static_cast<std::size_t>(c)];
    if (static_cast<std::size_t>(k) == m) break; // no shrink, nothing to gain
    m = static_cast<std::size_t>(k);
  }

  Partition out;
  out.assignment = std::move(node_to_comm);
  out.k = normalize_assignment(out.assignment);
  out.q = modularity(gain, out.assignment);
  return out;
}

Partition greedy_cnm(const GainMatrix& gain, DetectionTrace* trace) {
  const std::size_t n = gain.n;
  if (n == 0) throw std::invalid_argument("greedy_cnm: empty gain matrix");
  if (trace) {
    trace->initial_q = singleton_modularity(gain);
    trace->accepted_gains.clear();
  }

  // Block sums between live communities; community id = smallest member.
  std::vector<double> s = gain.b;
  std::vector<bool> alive(n, true);
  std::vector<int> label(n);
  std::iota(label.begin(), label.end(), 0);

  double q = singleton_modularity(gain);
  double best_q = q;
  std::vector<int> best_label = label;

  while (true) {
    double best_gain = 0.0;
    std::size_t best_a = 0, best_b = 0;
    bool found = false;
    for (std::size_t a = 0; a < n; ++a) {
      if (!alive[a]) continue;
      for (std::size_t bb = a + 1; bb < n; ++bb) {
        if (!alive[bb]) continue;
        const double gain_ab = 2.0 * s[a * n + bb] / gain.c_norm;
        if (gain_ab > best_gain) {
          best_gain = gain_ab;
          best_a = a;
          best_b = bb;
          found = true;
        }
      }
    }
    if (!found || best_gain <= kMoveThreshold) break;

    // Merge best_b into best_a.
    for (std::size_t x = 0; x < n; ++x) {
      if (!alive[x] || x == best_a || x == best_b) continue;
      s[best_a * n + x] += s[best_b * n + x];
      s[x * n + best_a] = s[best_a * n + x];
    }
    s[best_a * n + best_a] +=
        s[best_b * n + best_b] + 2.0 * s[best_a * n + best_b];
    alive[best_b] = false;
    for (int& l : label)
      if (l == static_cast<int>(best_b)) l = static_cast<int>(best_a);

    q += best_gain;
    if (trace) trace->accepted_gains.push_back(best_gain);
    if (q > best_q) {
      best_q = q;
      best_label = label;
    }
  }

  Partition out;
  out.assignment = std::move(best_label);
  out.k = normalize_assignment(out.assignment);
  out.q = modularity(gain, out.assignment);
  return out;
}

Partition brute_force_partition(const GainMatrix& gain) {
  const std::size_t n = gain.n;
  if (n == 0) throw std::invalid_argument("brute_force: empty gain matrix");
  if (n > 12)
    throw std::invalid_argument("brute_force_partition: N > 12 is off limits");

  std::vector<int> rgs(n, 0);
  std::vector<int> best = rgs;
  double best_q = modularity(gain, rgs);

  // Restricted growth strings in lexicographic order; >= keeps the last
  // maximizer, so full ties land on all-singletons.
  while (true) {
    int i = static_cast<int>(n) - 1;
    for (; i > 0; --i) {
      int prefix_max = 0;
      for (int j = 0; j < i; ++j) prefix_max = std::max(prefix_max, rgs[j]);
      if (rgs[i] <= prefix_max) break;
    }
    if (i == 0) break;
    ++rgs[static_cast<std::size_t>(i)];
    for (std::size_t j = static_cast<std::size_t>(i) + 1; j < n; ++j)
      rgs[j] = 0;

    const double q = modularity(gain, rgs);
    if (q >= best_q) {
      best_q = q;
      best = rgs;
    }
  }

  Partition out;
  out.assignment = std::move(best);
  out.k = normalize_assignment(out.assignment);
  out.q = modularity(gain, out.assignment);
  return out;
}

SectorOverlap sector_overlap(const Partition& partition,
                             const SectorMap& sectors,
                             const std::vector<std::string>& tickers) {
  if (tickers.size() != partition.assignment.size())
    throw std::invalid_argument("sector_overlap: ticker count mismatch");

  std::map<std::string, std::size_t> sector_index;
  for (const auto& ticker : tickers)
    sector_index.emplace(sectors.sector_of(ticker), 0);
  std::size_t idx = 0;
  for (auto& [label, i] : sector_index) i = idx++;

  SectorOverlap overlap;
  overlap.sectors.reserve(sector_index.size());
  for (const auto& [label, i] : sector_index) overlap.sectors.push_back(label);
  overlap.counts.assign(static_cast<std::size_t>(partition.k),
                        std::vector<std::size_t>(sector_index.size(), 0));
  for (std::size_t i = 0; i < tickers.size(); ++i) {
    const auto community = static_cast<std::size_t>(partition.assignment[i]);
    overlap.counts[community][sector_index[sectors.sector_of(tickers[i])]]++;
  }
  overlap.purity.resize(static_cast<std::size_t>(partition.k), 0.0);
  for (std::size_t c = 0; c < overlap.counts.size(); ++c) {
    std::size_t total = 0, top = 0;
    for (std::size_t v : overlap.counts[c]) {
      total += v;
      top = std::max(top, v);
    }
    overlap.purity[c] =
        total == 0 ? 0.0
                   : static_cast<double>(top) / static_cast<double>(total);
  }
  return overlap;
}

} // namespace sigcd
