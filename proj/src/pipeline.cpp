#include "sigcd/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sigcd/dates.hpp"
#include "sigcd/errors.hpp"
#include "sigcd/rng.hpp"
#include "sigcd/signature.hpp"

namespace fs = std::filesystem;

namespace sigcd {

namespace {

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    out.push_back(c);
    if (c == '"') out.push_back('"');
  }
  out.push_back('"');
  return out;
}

const std::set<std::string> kMethods = {"correlation", "sig-ed", "sig-cs",
                                        "sig-rbf"};
const std::set<std::string> kFilters = {"threshold", "rmt"};
const std::set<std::string> kAlgos = {"louvain", "greedy"};

// Builds matrices for the grid, caching the signature features shared by
// the three similarity methods.
class MatrixBuilder {
public:
  MatrixBuilder(const RunConfig& config, const ReturnsPanel& returns)
      : config_(config), returns_(returns) {}

  const FeatureMatrix& features() {
    if (!features_) {
      FeatureMatrix f = signature_features(returns_, config_.depth,
                                           config_.lag_on_increments);
      if (config_.normalize_features) standardize_features(f);
      features_ = std::move(f);
    }
    return *features_;
  }

  SymMatrix build(const std::string& method) {
    if (method == "correlation") return correlation_matrix(returns_);
    if (method == "sig-ed") return similarity_ed(features());
    if (method == "sig-cs") return similarity_cs(features());
    if (method == "sig-rbf") return similarity_rbf(features(), config_.gamma);
    throw ConfigError("unknown method: " + method);
  }

private:
  const RunConfig& config_;
  const ReturnsPanel& returns_;
  std::optional<FeatureMatrix> features_;
};

struct GainOutcome {
  GainMatrix gain;
  std::optional<double> theta_used;
  std::optional<double> density;
  bool disconnected = false;
};

GainOutcome build_gain(const RunConfig& config, const std::string& filter,
                       const SymMatrix& matrix, std::size_t n_obs,
                       std::map<std::string, SpectrumInfo>* spectra,
                       const std::string& method) {
  GainOutcome out;
  if (filter == "threshold") {
    double theta = 0.0;
    if (config.threshold) {
      theta = *config.threshold;
    } else {
      const double target = config.target_density.value_or(0.1);
      auto [suggested, density] = suggest_threshold(matrix, target);
      theta = suggested;
      out.density = density;
    }
    out.theta_used = theta;
    const AdjacencyMatrix adj = threshold_filter(matrix, theta);
    out.disconnected = adj.edge_count() == 0;
    out.gain = gain_from_adjacency(adj); // throws when there are no edges
    return out;
  }
  if (filter == "rmt") {
    const RmtSplit split = rmt_decompose(matrix, n_obs);
    if (spectra) {
      SpectrumInfo info;
      info.eigenvalues = split.eigenvalues;
      info.lambda_minus = split.lambda_minus;
      info.lambda_plus = split.lambda_plus;
      info.lambda_max = split.lambda_max;
      info.sigma2 = split.sigma2;
      info.sigma2_fallback = split.sigma2_fallback;
      info.noise_count = split.noise_count;
      info.structure_count = split.structure_count;
      info.n_obs = n_obs;
      (*spectra)[method + "_rmt"] = std::move(info);
    }
    out.gain = gain_from_rmt(split, matrix);
    return out;
  }
  throw ConfigError("unknown filter: " + filter);
}

Partition run_algo(const RunConfig& config, const std::string& algo,
                   const GainMatrix& gain) {
  if (algo == "louvain") return louvain(gain, config.louvain_shuffle_seed);
  if (algo == "greedy") return greedy_cnm(gain);
  throw ConfigError("unknown algorithm: " + algo);
}

std::vector<CellResult> run_cells(const RunConfig& config,
                                  const ReturnsPanel& returns,
                                  std::map<std::string, SpectrumInfo>* spectra,
                                  MatrixBuilder& builder) {
  std::vector<CellResult> cells;
  for (const auto& method : config.methods) {
    std::optional<SymMatrix> matrix;
    std::string method_error;
    try {
      matrix = builder.build(method);
    } catch (const std::exception& e) {
      method_error = e.what();
    }
    for (const auto& filter : config.filters) {
      std::optional<GainOutcome> gain;
      std::string filter_error = method_error;
      if (matrix) {
        try {
          gain = build_gain(config, filter, *matrix, returns.n_obs(), spectra,
                            method);
        } catch (const std::exception& e) {
          filter_error = e.what();
        }
      }
      for (const auto& algo : config.algos) {
        CellResult cell;
        cell.method = method;
        cell.filter = filter;
        cell.algo = algo;
        if (gain) {
          cell.theta_used = gain->theta_used;
          cell.density = gain->density;
          cell.disconnected = gain->disconnected;
          try {
            cell.partition = run_algo(config, algo, gain->gain);
            cell.ok = true;
          } catch (const std::exception& e) {
            cell.reason = e.what();
          }
        } else {
          cell.reason = filter_error;
        }
        cells.push_back(std::move(cell));
      }
    }
  }
  return cells;
}

std::vector<std::size_t> community_sizes(const Partition& partition) {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(partition.k), 0);
  for (int a : partition.assignment) ++sizes[static_cast<std::size_t>(a)];
  return sizes;
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path.string());
  out << content;
  if (!out) throw DataError("write failed: " + path.string());
}

std::string grid_csv(const GridResult& grid) {
  std::ostringstream out;
  out << "method,filter,algo,status,q,k,reason\n";
  for (const auto& cell : grid.cells) {
    out << cell.method << ',' << cell.filter << ',' << cell.algo << ','
        << (cell.ok ? "ok" : "failed") << ',';
    if (cell.ok)
      out << format_full(cell.partition.q) << ',' << cell.partition.k;
    else
      out << ',';
    out << ',' << csv_quote(cell.reason) << '\n';
  }
  return out.str();
}

std::string stability_csv(const StabilityResult& stability) {
  std::ostringstream out;
  out << "window,method,filter,algo,status,q,k,reason\n";
  for (const auto& row : stability.rows) {
    out << row.window << ',' << row.method << ',' << row.filter << ','
        << row.algo << ',' << (row.ok ? "ok" : "skipped") << ',';
    if (row.ok)
      out << format_full(row.q) << ',' << row.k;
    else
      out << ',';
    out << ',' << csv_quote(row.reason) << '\n';
  }
  return out.str();
}

std::string partition_csv(const GridResult& grid, const CellResult& cell) {
  std::ostringstream out;
  out << "ticker,community\n";
  for (std::size_t i = 0; i < grid.tickers.size(); ++i)
    out << grid.tickers[i] << ',' << cell.partition.assignment[i] << '\n';
  return out.str();
}

nlohmann::json spectrum_json(const SpectrumInfo& info) {
  nlohmann::json j;
  j["eigenvalues"] = info.eigenvalues;
  j["lambda_minus"] = info.lambda_minus;
  j["lambda_plus"] = info.lambda_plus;
  j["lambda_max"] = info.lambda_max;
  j["sigma2"] = info.sigma2;
  j["sigma2_fallback"] = info.sigma2_fallback;
  j["n_obs"] = info.n_obs;
  j["counts"] = {{"noise", info.noise_count},
                 {"structure", info.structure_count},
                 {"market", 1}};
  return j;
}

nlohmann::json grid_json(const GridResult& grid) {
  nlohmann::json j;
  j["n_series"] = grid.tickers.size();
  j["n_obs_returns"] = grid.n_obs_returns;
  j["seed"] = grid.config.seed;
  j["depth"] = grid.config.depth;
  j["cells"] = nlohmann::json::array();
  for (const auto& cell : grid.cells) {
    nlohmann::json c;
    c["method"] = cell.method;
    c["filter"] = cell.filter;
    c["algo"] = cell.algo;
    c["status"] = cell.ok ? "ok" : "failed";
    c["reason"] = cell.reason;
    if (cell.theta_used) c["theta"] = *cell.theta_used;
    if (cell.density) c["density"] = *cell.density;
    if (cell.disconnected) c["disconnected"] = true;
    if (cell.ok) {
      c["q"] = cell.partition.q;
      c["k"] = cell.partition.k;
      c["sizes"] = community_sizes(cell.partition);
      if (grid.sectors) {
        const SectorOverlap overlap =
            sector_overlap(cell.partition, *grid.sectors, grid.tickers);
        c["sector_overlap"] = {{"sectors", overlap.sectors},
                               {"counts", overlap.counts},
                               {"purity", overlap.purity}};
      }
    }
    j["cells"].push_back(std::move(c));
  }
  return j;
}

std::string signatures_csv(const GridResult& grid) {
  const FeatureMatrix& f = *grid.feature_dump;
  std::ostringstream out;
  out << "ticker,word,coefficient\n";
  for (std::size_t i = 0; i < grid.tickers.size(); ++i) {
    std::size_t col = 0;
    for (int level = 1; level <= grid.config.depth; ++level) {
      const std::size_t width = std::size_t{1} << level;
      for (std::size_t w = 0; w < width; ++w, ++col)
        out << grid.tickers[i] << ','
            << TruncatedSignature::word_string(level, w, 2) << ','
            << format_full(f(i, col)) << '\n';
    }
  }
  return out.str();
}

} // namespace

void RunConfig::validate() const {
  if (depth < 1) throw ConfigError("depth must be >= 1");
  if (!(min_coverage > 0.0 && min_coverage <= 1.0))
    throw ConfigError("min-coverage must be in (0,1]");
  if (threshold && target_density)
    throw ConfigError("--threshold and --target-density are mutually exclusive");
  if (target_density && !(*target_density > 0.0 && *target_density < 1.0))
    throw ConfigError("target-density must be in (0,1)");
  if (!(start_frac > 0.0 && start_frac < 1.0))
    throw ConfigError("start-frac must be in (0,1)");
  if (methods.empty() || filters.empty() || algos.empty())
    throw ConfigError("methods, filters and algos must be non-empty");
  for (const auto& m : methods)
    if (!kMethods.count(m)) throw ConfigError("unknown method: " + m);
  for (const auto& f : filters)
    if (!kFilters.count(f)) throw ConfigError("unknown filter: " + f);
  for (const auto& a : algos)
    if (!kAlgos.count(a)) throw ConfigError("unknown algorithm: " + a);
}

GridResult run_grid(const RunConfig& config) {
  config.validate();
  if (config.prices_path.empty())
    throw ConfigError("run requires --prices");
  const PricePanel raw = load_price_panel(config.prices_path);
  std::optional<SectorMap> sectors;
  if (!config.sectors_path.empty())
    sectors = load_sector_map(config.sectors_path);
  return run_grid(config, raw, sectors ? &*sectors : nullptr);
}

GridResult run_grid(const RunConfig& config, const PricePanel& prices,
                    const SectorMap* sectors) {
  config.validate();
  const PricePanel panel = filter_insufficient(prices, config.min_coverage);
  const ReturnsPanel returns = compute_log_returns(panel);

  GridResult grid;
  grid.config = config;
  grid.tickers = returns.tickers;
  grid.n_obs_returns = returns.n_obs();
  if (sectors) grid.sectors = *sectors;

  MatrixBuilder builder(config, returns);
  grid.cells = run_cells(config, returns, &grid.spectra, builder);

  if (config.dump_matrices)
    for (const auto& method : config.methods)
      try {
        grid.matrices[method] = builder.build(method);
      } catch (const std::exception&) {
        // the matching cells already carry the failure reason
      }
  if (config.dump_signatures) {
    bool any_sig = false;
    for (const auto& method : config.methods) any_sig |= method != "correlation";
    if (any_sig) grid.feature_dump = builder.features();
  }
  return grid;
}

std::vector<std::size_t> stability_windows(std::size_t n_returns,
                                           double start_frac,
                                           std::size_t step) {
  if (n_returns < 2)
    throw ConfigError("stability needs at least two return observations");
  auto start = static_cast<std::size_t>(
      std::ceil(start_frac * static_cast<double>(n_returns)));
  start = std::max<std::size_t>(start, 2);
  if (start >= n_returns)
    throw ConfigError("start window spans the whole panel");
  if (step == 0) {
    const double auto_step =
        std::round(static_cast<double>(n_returns - start) / 10.0);
    step = std::max<std::size_t>(1, static_cast<std::size_t>(auto_step));
  }
  std::vector<std::size_t> windows;
  for (std::size_t w = start; w < n_returns; w += step) windows.push_back(w);
  windows.push_back(n_returns);
  return windows;
}

StabilityResult stability_analysis(const RunConfig& config) {
  config.validate();
  if (config.prices_path.empty())
    throw ConfigError("stability requires --prices");
  return stability_analysis(config, load_price_panel(config.prices_path));
}

StabilityResult stability_analysis(const RunConfig& config,
                                   const PricePanel& prices) {
  config.validate();
  const PricePanel panel = filter_insufficient(prices, config.min_coverage);
  const ReturnsPanel returns = compute_log_returns(panel);

  StabilityResult result;
  result.windows =
      stability_windows(returns.n_obs(), config.start_frac, config.step);
  for (const std::size_t window : result.windows) {
    const ReturnsPanel slice = returns.prefix(window);
    MatrixBuilder builder(config, slice);
    const auto cells = run_cells(config, slice, nullptr, builder);
    for (const auto& cell : cells) {
      StabilityRow row;
      row.window = window;
      row.method = cell.method;
      row.filter = cell.filter;
      row.algo = cell.algo;
      row.ok = cell.ok;
      row.reason = cell.reason;
      if (cell.ok) {
        row.q = cell.partition.q;
        row.k = cell.partition.k;
      }
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

SynthPanel synth_panel(std::size_t n_series, std::size_t n_obs,
                       std::size_t n_blocks, double intra_corr,
                       std::uint64_t seed) {
  if (n_series < 1) throw ConfigError("synth: need at least one series");
  if (n_obs < 2) throw ConfigError("synth: need T >= 2");
  if (n_blocks < 1 || n_blocks > n_series)
    throw ConfigError("synth: blocks must be in [1, N]");
  if (!(intra_corr >= 0.0 && intra_corr < 1.0))
    throw ConfigError("synth: intra-block correlation must be in [0,1)");

  SynthPanel out;
  out.labels.resize(n_series);
  {
    // Contiguous near-equal blocks; the first N % K blocks get one extra.
    const std::size_t base = n_series / n_blocks;
    const std::size_t extra = n_series % n_blocks;
    std::size_t node = 0;
    for (std::size_t b = 0; b < n_blocks; ++b) {
      const std::size_t size = base + (b < extra ? 1 : 0);
      for (std::size_t j = 0; j < size; ++j) out.labels[node++] = static_cast<int>(b);
    }
  }

  PricePanel& panel = out.panel;
  panel.tickers.resize(n_series);
  {
    std::size_t width = 1;
    for (std::size_t v = n_series - 1; v >= 10; v /= 10) ++width;
    width = std::max<std::size_t>(width, 3);
    for (std::size_t i = 0; i < n_series; ++i) {
      std::string digits = std::to_string(i);
      panel.tickers[i] =
          "S" + std::string(width - std::min(width, digits.size()), '0') +
          digits;
    }
  }
  panel.timestamps.resize(n_obs);
  {
    const std::int64_t day0 = days_from_civil(CivilDate{2000, 1, 3});
    for (std::size_t t = 0; t < n_obs; ++t)
      panel.timestamps[t] =
          format_iso_date(civil_from_days(day0 + static_cast<std::int64_t>(t)));
  }

  panel.values.assign(n_series * n_obs, 0.0);
  panel.present.assign(n_series * n_obs, 1);
  for (std::size_t i = 0; i < n_series; ++i) panel.values[i * n_obs] = 100.0;

  Rng rng(seed);
  const double scale = 0.004; // daily-return magnitude of the generator
  const double load_common = std::sqrt(intra_corr);
  const double load_idio = std::sqrt(1.0 - intra_corr);
  // Each block also gets a distinct deterministic trend. Correlation is
  // mean-invariant, so the equicorrelation structure is untouched, while
  // level-sensitive representations see a concentrated block signal; the
  // planted partition stays recoverable by both routes. The step size keeps
  // cross-block similarities well above zero so the leading similarity
  // eigenvector remains the shared baseline rather than a block indicator.
  std::vector<double> drift(n_blocks, 0.0);
  if (n_blocks > 1)
    for (std::size_t b = 0; b < n_blocks; ++b)
      drift[b] = 0.175 * scale * std::sqrt(intra_corr) *
                 (static_cast<double>(b) -
                  0.5 * static_cast<double>(n_blocks - 1));
  std::vector<double> common(n_blocks, 0.0);
  for (std::size_t t = 1; t < n_obs; ++t) {
    for (std::size_t b = 0; b < n_blocks; ++b) common[b] = rng.normal();
    for (std::size_t i = 0; i < n_series; ++i) {
      const auto block = static_cast<std::size_t>(out.labels[i]);
      const double r = drift[block] + scale * (load_common * common[block] +
                                               load_idio * rng.normal());
      panel.values[i * n_obs + t] = panel.values[i * n_obs + t - 1] * std::exp(r);
    }
  }
  return out;
}

void emit_report(const RunOutputs& outputs, const std::string& out_dir) {
  const GridResult& grid = outputs.grid;
  const fs::path out_path(out_dir);
  fs::create_directories(out_path);
  const fs::path staging = out_path / ".staging";
  std::error_code ec;
  fs::remove_all(staging, ec);
  fs::create_directories(staging); // fails fast when out_dir is unwritable

  std::vector<std::string> names;
  const auto stage = [&](const std::string& name, const std::string& content) {
    write_text_file(staging / name, content);
    names.push_back(name);
  };

  stage("grid.csv", grid_csv(grid));
  stage("grid.json", grid_json(grid).dump(2) + "\n");
  for (const auto& cell : grid.cells)
    if (cell.ok) stage("partition_" + cell.name() + ".csv",
                       partition_csv(grid, cell));
  for (const auto& [key, info] : grid.spectra)
    stage("spectrum_" + key + ".json", spectrum_json(info).dump(2) + "\n");
  if (outputs.stability) stage("stability.csv", stability_csv(*outputs.stability));
  for (const auto& [method, matrix] : grid.matrices)
    stage("matrix_" + method + ".csv", matrix_to_csv(matrix, grid.tickers));
  if (grid.feature_dump) stage("signatures.csv", signatures_csv(grid));

  for (const auto& name : names) fs::rename(staging / name, out_path / name);
  fs::remove_all(staging);
}

void write_synth_panel(const SynthPanel& synth, const std::string& out_dir) {
  const fs::path out_path(out_dir);
  fs::create_directories(out_path);
  const fs::path staging = out_path / ".staging";
  std::error_code ec;
  fs::remove_all(staging, ec);
  fs::create_directories(staging);

  std::ostringstream prices;
  prices << "date";
  for (const auto& t : synth.panel.tickers) prices << ',' << t;
  prices << '\n';
  for (std::size_t t = 0; t < synth.panel.n_obs(); ++t) {
    prices << synth.panel.timestamps[t];
    for (std::size_t i = 0; i < synth.panel.n_series(); ++i)
      prices << ',' << format_full(synth.panel.value(i, t));
    prices << '\n';
  }
  write_text_file(staging / "prices.csv", prices.str());

  std::ostringstream sectors;
  sectors << "ticker,sector\n";
  for (std::size_t i = 0; i < synth.panel.n_series(); ++i)
    sectors << synth.panel.tickers[i] << ",B" << synth.labels[i] << '\n';
  write_text_file(staging / "sectors.csv", sectors.str());

  fs::rename(staging / "prices.csv", out_path / "prices.csv");
  fs::rename(staging / "sectors.csv", out_path / "sectors.csv");
  fs::remove_all(staging);
}

} // namespace sigcd
