#ifndef SIGCD_PIPELINE_HPP
#define SIGCD_PIPELINE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sigcd/community.hpp"
#include "sigcd/panel.hpp"
#include "sigcd/similarity.hpp"
#include "sigcd/spectral.hpp"

namespace sigcd {

// One batch configuration. Methods, filters and algorithms run as a full
// grid in the given order; threshold and target_density are mutually
// exclusive (the density route suggests a per-matrix theta).
struct RunConfig {
  std::string prices_path;
  std::string sectors_path;
  std::string out_dir = "out";

  std::vector<std::string> methods = {"correlation", "sig-ed", "sig-cs",
                                      "sig-rbf"};
  std::vector<std::string> filters = {"threshold", "rmt"};
  std::vector<std::string> algos = {"louvain", "greedy"};

  int depth = 3;
  double min_coverage = 0.99;
  std::optional<double> threshold;
  std::optional<double> target_density;
  double gamma = 0.0; // <= 0 selects the median heuristic
  bool lag_on_increments = false;
  bool normalize_features = false;
  std::optional<std::uint64_t> louvain_shuffle_seed;

  double start_frac = 1.0 / 3.0;
  std::size_t step = 0; // 0 = auto: (T - ceil(T/3))/10, at least 1

  std::uint64_t seed = 0;

  // Optional extra dumps emitted alongside the reports.
  bool dump_matrices = false;
  bool dump_signatures = false;

  void validate() const;
};

struct CellResult {
  std::string method;
  std::string filter;
  std::string algo;
  bool ok = false;
  std::string reason;
  Partition partition;
  std::optional<double> theta_used;
  std::optional<double> density;
  bool disconnected = false;

  std::string name() const { return method + "_" + filter + "_" + algo; }
};

struct SpectrumInfo {
  std::vector<double> eigenvalues;
  double lambda_minus = 0.0;
  double lambda_plus = 0.0;
  double lambda_max = 0.0;
  double sigma2 = 0.0;
  bool sigma2_fallback = false;
  std::size_t noise_count = 0;
  std::size_t structure_count = 0;
  std::size_t n_obs = 0;
};

struct GridResult {
  RunConfig config;
  std::vector<std::string> tickers;
  std::size_t n_obs_returns = 0;
  std::vector<CellResult> cells;
  std::map<std::string, SpectrumInfo> spectra; // key: <method>_rmt
  std::map<std::string, SymMatrix> matrices;   // only when dump_matrices
  std::optional<FeatureMatrix> feature_dump;   // only when dump_signatures
  std::optional<SectorMap> sectors;
};

struct StabilityRow {
  std::size_t window = 0;
  std::string method;
  std::string filter;
  std::string algo;
  bool ok = false;
  std::string reason;
  double q = 0.0;
  int k = 0;
};

struct StabilityResult {
  std::vector<std::size_t> windows;
  std::vector<StabilityRow> rows;
};

struct RunOutputs {
  GridResult grid;
  std::optional<StabilityResult> stability;
};

struct SynthPanel {
  PricePanel panel;
  std::vector<int> labels; // planted block per series
};

// Full grid over (method, filter, algorithm). A failing stage marks its
// cells failed with the reason; the other cells proceed.
GridResult run_grid(const RunConfig& config);
GridResult run_grid(const RunConfig& config, const PricePanel& prices,
                    const SectorMap* sectors);

// Prefix windows of the return panel: ceil(f*T), +step, ..., T. RMT cells
// are skipped with a reason when the window is not longer than N.
StabilityResult stability_analysis(const RunConfig& config);
StabilityResult stability_analysis(const RunConfig& config,
                                   const PricePanel& prices);

// Window lengths only, exposed for window arithmetic checks.
std::vector<std::size_t> stability_windows(std::size_t n_returns,
                                           double start_frac,
                                           std::size_t step);

// Block-equicorrelated Gaussian returns (rho within each of n_blocks
// near-equal contiguous blocks, 0 across), exponentiated into prices with
// initial price 100. Deterministic in seed.
SynthPanel synth_panel(std::size_t n_series, std::size_t n_obs,
                       std::size_t n_blocks, double intra_corr,
                       std::uint64_t seed);

// Writes grid.csv, grid.json, partition_<cell>.csv, spectrum_<key>.json and
// stability.csv under out_dir. Everything is staged first and renamed into
// place, so a failure leaves no partial report.
void emit_report(const RunOutputs& outputs, const std::string& out_dir);

// Writes prices.csv and sectors.csv for a synthetic panel.
void write_synth_panel(const SynthPanel& synth, const std::string& out_dir);

} // namespace sigcd

#endif
