#ifndef SIGCD_PANEL_HPP
#define SIGCD_PANEL_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace sigcd {

// Aligned multi-series price panel. Values are row-major N x T; missing
// cells carry NaN and a cleared presence flag. Timestamps are ISO dates,
// strictly increasing, shared by all rows.
struct PricePanel {
  std::vector<std::string> tickers;
  std::vector<std::string> timestamps;
  std::vector<double> values;
  std::vector<std::uint8_t> present;

  std::size_t n_series() const { return tickers.size(); }
  std::size_t n_obs() const { return timestamps.size(); }
  double value(std::size_t i, std::size_t t) const {
    return values[i * n_obs() + t];
  }
  bool is_present(std::size_t i, std::size_t t) const {
    return present[i * n_obs() + t] != 0;
  }
  bool complete() const;
};

// Log-return panel: N x (T-1), no missing entries.
struct ReturnsPanel {
  std::vector<std::string> tickers;
  std::vector<std::string> timestamps;
  std::vector<double> values;

  std::size_t n_series() const { return tickers.size(); }
  std::size_t n_obs() const { return timestamps.size(); }
  double value(std::size_t i, std::size_t t) const {
    return values[i * n_obs() + t];
  }
  // First n columns as a copy; used by the stability windows.
  ReturnsPanel prefix(std::size_t n_cols) const;
};

struct SectorMap {
  std::map<std::string, std::string> by_ticker;

  std::size_t size() const { return by_ticker.size(); }
  // "Unknown" when the ticker is unmapped.
  std::string sector_of(const std::string& ticker) const;
};

struct CsvOptions {
  char delimiter = ',';
};

// Price CSV: header `date,<ticker1>,...`; first column ISO-8601 dates; empty
// cell = missing. Rows are sorted by timestamp; duplicate dates are a data
// error, as is any non-positive price.
PricePanel load_price_panel(const std::string& path,
                            const CsvOptions& options = {});

// Drops tickers whose observed fraction is below min_coverage, then fills
// the survivors forward (first observation backward-filled). The result has
// no missing entries.
PricePanel filter_insufficient(const PricePanel& panel, double min_coverage);

// r_i(t) = ln(S_i(t) / S_i(t-1)). Requires a complete panel.
ReturnsPanel compute_log_returns(const PricePanel& panel);

// Sector CSV: header `ticker,sector`; duplicate tickers are a data error.
SectorMap load_sector_map(const std::string& path,
                          const CsvOptions& options = {});

} // namespace sigcd

#endif
