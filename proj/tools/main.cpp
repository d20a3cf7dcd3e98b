#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "sigcd/errors.hpp"
#include "sigcd/pipeline.hpp"

namespace {

struct CliState {
  sigcd::RunConfig config;
  std::string config_path;
  std::string gamma_text = "median";
  std::vector<std::string> methods;
  std::vector<std::string> filters;
  std::vector<std::string> algos;
  double threshold = 0.0;
  double target_density = 0.0;
  std::uint64_t shuffle_seed = 0;
  std::string lag_input = "cumsum";
};

std::string trim(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

// key = value lines, # comments, optional quotes around the value.
std::vector<std::pair<std::string, std::string>> read_config_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw sigcd::ConfigError("cannot open config file: " + path);
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw sigcd::ConfigError(path + ":" + std::to_string(line_no) +
                               ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && ((value.front() == '"' && value.back() == '"') ||
                              (value.front() == '\'' && value.back() == '\'')))
      value = value.substr(1, value.size() - 2);
    if (key.empty())
      throw sigcd::ConfigError(path + ":" + std::to_string(line_no) +
                               ": empty key");
    entries.emplace_back(std::move(key), std::move(value));
  }
  return entries;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(value);
  while (std::getline(in, field, ',')) {
    field = trim(field);
    if (!field.empty()) out.push_back(field);
  }
  return out;
}

double parse_number(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double parsed = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("");
    return parsed;
  } catch (const std::exception&) {
    throw sigcd::ConfigError("config key `" + key + "`: bad number `" +
                             value + "`");
  }
}

std::uint64_t parse_unsigned(const std::string& key,
                             const std::string& value) {
  try {
    std::size_t used = 0;
    const unsigned long long parsed = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument("");
    return parsed;
  } catch (const std::exception&) {
    throw sigcd::ConfigError("config key `" + key + "`: bad integer `" +
                             value + "`");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw sigcd::ConfigError("config key `" + key + "`: bad boolean `" + value +
                           "`");
}

// Applies one config-file entry unless the matching flag was given on the
// command line (flags win).
void apply_config_entry(CLI::App* cmd, CliState& state, const std::string& key,
                        const std::string& value) {
  const auto flag_given = [&](const char* name) {
    const CLI::Option* option = cmd->get_option_no_throw(name);
    return option != nullptr && option->count() > 0;
  };
  const std::string flag = "--" + key;
  if (cmd->get_option_no_throw(flag) == nullptr)
    throw sigcd::ConfigError("unknown config key `" + key + "`");
  if (flag_given(flag.c_str())) return;

  sigcd::RunConfig& config = state.config;
  if (key == "prices") config.prices_path = value;
  else if (key == "sectors") config.sectors_path = value;
  else if (key == "out") config.out_dir = value;
  else if (key == "seed") config.seed = parse_unsigned(key, value);
  else if (key == "depth") config.depth = static_cast<int>(parse_unsigned(key, value));
  else if (key == "min-coverage") config.min_coverage = parse_number(key, value);
  else if (key == "methods") state.methods = split_list(value);
  else if (key == "filters") state.filters = split_list(value);
  else if (key == "algos") state.algos = split_list(value);
  else if (key == "threshold") config.threshold = parse_number(key, value);
  else if (key == "target-density") config.target_density = parse_number(key, value);
  else if (key == "gamma") state.gamma_text = value;
  else if (key == "lag-input") state.lag_input = value;
  else if (key == "normalize-features") config.normalize_features = parse_bool(key, value);
  else if (key == "shuffle-seed") config.louvain_shuffle_seed = parse_unsigned(key, value);
  else if (key == "start-frac") config.start_frac = parse_number(key, value);
  else if (key == "step") config.step = parse_unsigned(key, value);
  else if (key == "dump-matrices") config.dump_matrices = parse_bool(key, value);
  else if (key == "dump-signatures") config.dump_signatures = parse_bool(key, value);
  else
    throw sigcd::ConfigError("unknown config key `" + key + "`");
}

void add_shared_options(CLI::App* cmd, CliState& state) {
  cmd->add_option("--config", state.config_path,
                  "key=value config file; command-line flags win");
  cmd->add_option("--prices", state.config.prices_path, "price panel CSV");
  cmd->add_option("--sectors", state.config.sectors_path, "sector map CSV");
  cmd->add_option("--out", state.config.out_dir, "output directory")
      ->capture_default_str();
  cmd->add_option("--seed", state.config.seed, "run seed")
      ->capture_default_str();
  cmd->add_option("--depth", state.config.depth, "signature truncation depth")
      ->capture_default_str();
  cmd->add_option("--min-coverage", state.config.min_coverage,
                  "minimum observed fraction per ticker")
      ->capture_default_str();
  cmd->add_option("--methods", state.methods,
                  "correlation,sig-ed,sig-cs,sig-rbf")
      ->delimiter(',');
  cmd->add_option("--filters", state.filters, "threshold,rmt")->delimiter(',');
  cmd->add_option("--algos", state.algos, "louvain,greedy")->delimiter(',');
  cmd->add_option("--threshold", state.threshold, "fixed filter threshold");
  cmd->add_option("--target-density", state.target_density,
                  "suggest a threshold hitting this edge density");
  cmd->add_option("--gamma", state.gamma_text, "RBF gamma or `median`")
      ->capture_default_str();
  cmd->add_option("--lag-input", state.lag_input,
                  "lead-lag input: cumsum or increments")
      ->capture_default_str();
  cmd->add_flag("--normalize-features", state.config.normalize_features,
                "z-score signature features before distances");
  cmd->add_option("--shuffle-seed", state.shuffle_seed,
                  "seeded Louvain node order (default: fixed order)");
}

void finalize(CLI::App* cmd, CliState& state) {
  if (!state.config_path.empty())
    for (const auto& [key, value] : read_config_file(state.config_path))
      apply_config_entry(cmd, state, key, value);
  if (!state.methods.empty()) state.config.methods = state.methods;
  if (!state.filters.empty()) state.config.filters = state.filters;
  if (!state.algos.empty()) state.config.algos = state.algos;
  if (cmd->count("--threshold")) state.config.threshold = state.threshold;
  if (cmd->count("--target-density"))
    state.config.target_density = state.target_density;
  if (cmd->count("--shuffle-seed"))
    state.config.louvain_shuffle_seed = state.shuffle_seed;
  if (state.gamma_text == "median") {
    state.config.gamma = 0.0;
  } else {
    try {
      std::size_t used = 0;
      state.config.gamma = std::stod(state.gamma_text, &used);
      if (used != state.gamma_text.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw sigcd::ConfigError("--gamma must be a number or `median`");
    }
    if (state.config.gamma <= 0.0)
      throw sigcd::ConfigError("--gamma must be positive");
  }
  if (state.lag_input == "increments")
    state.config.lag_on_increments = true;
  else if (state.lag_input != "cumsum")
    throw sigcd::ConfigError("--lag-input must be cumsum or increments");
}

void print_grid(const sigcd::GridResult& grid) {
  std::printf("N=%zu series, T=%zu return observations\n",
              grid.tickers.size(), grid.n_obs_returns);
  for (const auto& cell : grid.cells) {
    if (cell.ok)
      std::printf("%-28s q=%+.6f  k=%d\n", cell.name().c_str(),
                  cell.partition.q, cell.partition.k);
    else
      std::printf("%-28s failed: %s\n", cell.name().c_str(),
                  cell.reason.c_str());
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Community detection for time series panels via truncated "
               "path signatures"};
  app.require_subcommand(1);

  CliState run_state, stab_state, spec_state;

  auto* run_cmd = app.add_subcommand(
      "run", "full (method x filter x algorithm) grid on a price panel");
  add_shared_options(run_cmd, run_state);
  run_cmd->add_flag("--dump-matrices", run_state.config.dump_matrices,
                    "also write matrix_<method>.csv");
  run_cmd->add_flag("--dump-signatures", run_state.config.dump_signatures,
                    "also write signatures.csv");

  auto* stab_cmd = app.add_subcommand(
      "stability", "rerun the grid on growing prefix windows");
  add_shared_options(stab_cmd, stab_state);
  stab_cmd->add_option("--start-frac", stab_state.config.start_frac,
                       "first window as a fraction of T")
      ->capture_default_str();
  stab_cmd->add_option("--step", stab_state.config.step,
                       "window increment in observations (0 = auto)")
      ->capture_default_str();

  auto* synth_cmd = app.add_subcommand(
      "synth", "write a block-equicorrelated synthetic price panel");
  std::size_t synth_n = 40, synth_t = 1000, synth_blocks = 4;
  double synth_rho = 0.7;
  std::uint64_t synth_seed = 0;
  std::string synth_out = "out";
  synth_cmd->add_option("--n", synth_n, "number of series")
      ->capture_default_str();
  synth_cmd->add_option("--t", synth_t, "number of price observations")
      ->capture_default_str();
  synth_cmd->add_option("--blocks", synth_blocks, "number of planted blocks")
      ->capture_default_str();
  synth_cmd->add_option("--rho", synth_rho, "intra-block correlation")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth_seed, "generator seed")
      ->capture_default_str();
  synth_cmd->add_option("--out", synth_out, "output directory")
      ->capture_default_str();

  auto* spec_cmd = app.add_subcommand(
      "spectrum", "RMT spectral report for each configured method");
  add_shared_options(spec_cmd, spec_state);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run_cmd->parsed()) {
      finalize(run_cmd, run_state);
      sigcd::RunOutputs outputs;
      outputs.grid = sigcd::run_grid(run_state.config);
      sigcd::emit_report(outputs, run_state.config.out_dir);
      print_grid(outputs.grid);
      std::printf("report written to %s\n", run_state.config.out_dir.c_str());
    } else if (stab_cmd->parsed()) {
      finalize(stab_cmd, stab_state);
      sigcd::RunOutputs outputs;
      outputs.grid = sigcd::run_grid(stab_state.config);
      outputs.stability = sigcd::stability_analysis(stab_state.config);
      sigcd::emit_report(outputs, stab_state.config.out_dir);
      std::printf("windows:");
      for (std::size_t w : outputs.stability->windows) std::printf(" %zu", w);
      std::printf("\nstability curve written to %s/stability.csv\n",
                  stab_state.config.out_dir.c_str());
    } else if (synth_cmd->parsed()) {
      const sigcd::SynthPanel synth = sigcd::synth_panel(
          synth_n, synth_t, synth_blocks, synth_rho, synth_seed);
      sigcd::write_synth_panel(synth, synth_out);
      std::printf("synthetic panel (N=%zu, T=%zu, K=%zu) written to %s\n",
                  synth_n, synth_t, synth_blocks, synth_out.c_str());
    } else if (spec_cmd->parsed()) {
      finalize(spec_cmd, spec_state);
      spec_state.config.filters = {"rmt"};
      sigcd::RunOutputs outputs;
      outputs.grid = sigcd::run_grid(spec_state.config);
      sigcd::emit_report(outputs, spec_state.config.out_dir);
      for (const auto& [key, info] : outputs.grid.spectra)
        std::printf("%-24s lambda_max=%.6f  band=[%.6f, %.6f]  "
                    "noise=%zu structure=%zu sigma2=%.6f%s\n",
                    key.c_str(), info.lambda_max, info.lambda_minus,
                    info.lambda_plus, info.noise_count, info.structure_count,
                    info.sigma2, info.sigma2_fallback ? " (fallback)" : "");
    }
  } catch (const sigcd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const sigcd::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const sigcd::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
