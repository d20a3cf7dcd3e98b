#include "sigcd/panel.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "sigcd/dates.hpp"
#include "sigcd/errors.hpp"

namespace sigcd {

std::int64_t days_from_civil(const CivilDate& d) {
  // Howard Hinnant's civil-days algorithm.
  const int y = d.year - (d.month <= 2 ? 1 : 0);
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy =
      (153u * static_cast<unsigned>(d.month + (d.month > 2 ? -3 : 9)) + 2u) /
          5u +
      static_cast<unsigned>(d.day) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

CivilDate civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe =
      (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned day = doy - (153 * mp + 2) / 5 + 1;
  const unsigned month = mp < 10 ? mp + 3 : mp - 9;
  return CivilDate{static_cast<int>(y + (month <= 2 ? 1 : 0)),
                   static_cast<int>(month), static_cast<int>(day)};
}

bool parse_iso_date(const std::string& text, CivilDate& out) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
    if (text[i] < '0' || text[i] > '9') return false;
  out.year = std::stoi(text.substr(0, 4));
  out.month = std::stoi(text.substr(5, 2));
  out.day = std::stoi(text.substr(8, 2));
  if (out.month < 1 || out.month > 12 || out.day < 1 || out.day > 31)
    return false;
  // Round-trip rejects impossible days like Feb 30.
  const CivilDate back = civil_from_days(days_from_civil(out));
  return back.year == out.year && back.month == out.month &&
         back.day == out.day;
}

std::string format_iso_date(const CivilDate& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
  return std::string(buf);
}

namespace {

std::vector<std::string> split_line(const std::string& line, char delimiter) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == delimiter) {
      out.push_back(field);
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  out.push_back(field);
  return out;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

bool parse_double(const std::string& text, double& out) {
  errno = 0;
  char* end = nullptr;
  out = std::strtod(text.c_str(), &end);
  return end == text.c_str() + text.size() && end != text.c_str() &&
         errno == 0;
}

} // namespace

bool PricePanel::complete() const {
  return std::all_of(present.begin(), present.end(),
                     [](std::uint8_t p) { return p != 0; });
}

ReturnsPanel ReturnsPanel::prefix(std::size_t n_cols) const {
  if (n_cols > n_obs())
    throw std::invalid_argument("prefix longer than panel");
  ReturnsPanel out;
  out.tickers = tickers;
  out.timestamps.assign(timestamps.begin(),
                        timestamps.begin() + static_cast<std::ptrdiff_t>(n_cols));
  out.values.resize(n_series() * n_cols);
  for (std::size_t i = 0; i < n_series(); ++i)
    for (std::size_t t = 0; t < n_cols; ++t)
      out.values[i * n_cols + t] = value(i, t);
  return out;
}

std::string SectorMap::sector_of(const std::string& ticker) const {
  const auto it = by_ticker.find(ticker);
  return it == by_ticker.end() ? std::string("Unknown") : it->second;
}

PricePanel load_price_panel(const std::string& path,
                            const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open price file: " + path);

  std::string line;
  if (!std::getline(in, line))
    throw DataError("price file is empty: " + path);
  const auto header = split_line(strip_cr(line), options.delimiter);
  if (header.size() < 2 || header[0] != "date")
    throw DataError("price header must be `date,<ticker>,...` in " + path);
  const std::size_t n = header.size() - 1;

  struct Row {
    std::int64_t day;
    std::string date;
    std::vector<double> values;
    std::vector<std::uint8_t> present;
  };
  std::vector<Row> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_line(line, options.delimiter);
    if (fields.size() != header.size())
      throw DataError("row " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    CivilDate date;
    if (!parse_iso_date(fields[0], date))
      throw DataError("row " + std::to_string(line_no) +
                      ", column 1: bad date `" + fields[0] + "`");
    Row row;
    row.day = days_from_civil(date);
    row.date = fields[0];
    row.values.assign(n, std::numeric_limits<double>::quiet_NaN());
    row.present.assign(n, 0);
    for (std::size_t j = 0; j < n; ++j) {
      const std::string& cell = fields[j + 1];
      if (cell.empty()) continue;
      double v = 0.0;
      if (!parse_double(cell, v))
        throw DataError("row " + std::to_string(line_no) + ", column " +
                        std::to_string(j + 2) + ": bad number `" + cell + "`");
      if (!std::isfinite(v) || v <= 0.0)
        throw DataError("non-positive price for " + header[j + 1] + " on " +
                        row.date);
      row.values[j] = v;
      row.present[j] = 1;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("price file has no data rows: " + path);

  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.day < b.day; });
  for (std::size_t t = 1; t < rows.size(); ++t)
    if (rows[t].day == rows[t - 1].day)
      throw DataError("duplicate date " + rows[t].date);

  PricePanel panel;
  panel.tickers.assign(header.begin() + 1, header.end());
  panel.timestamps.reserve(rows.size());
  const std::size_t t_count = rows.size();
  panel.values.assign(n * t_count, std::numeric_limits<double>::quiet_NaN());
  panel.present.assign(n * t_count, 0);
  for (std::size_t t = 0; t < t_count; ++t) {
    panel.timestamps.push_back(rows[t].date);
    for (std::size_t i = 0; i < n; ++i) {
      panel.values[i * t_count + t] = rows[t].values[i];
      panel.present[i * t_count + t] = rows[t].present[i];
    }
  }
  return panel;
}

PricePanel filter_insufficient(const PricePanel& panel, double min_coverage) {
  if (!(min_coverage > 0.0 && min_coverage <= 1.0))
    throw std::invalid_argument("min_coverage must be in (0,1]");
  const std::size_t t_count = panel.n_obs();

  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < panel.n_series(); ++i) {
    std::size_t observed = 0;
    for (std::size_t t = 0; t < t_count; ++t)
      if (panel.is_present(i, t)) ++observed;
    const double coverage =
        static_cast<double>(observed) / static_cast<double>(t_count);
    if (coverage >= min_coverage) kept.push_back(i);
  }
  if (kept.empty())
    throw DataError("all tickers dropped at min_coverage=" +
                    std::to_string(min_coverage));

  PricePanel out;
  out.timestamps = panel.timestamps;
  out.tickers.reserve(kept.size());
  out.values.assign(kept.size() * t_count, 0.0);
  out.present.assign(kept.size() * t_count, 1);
  for (std::size_t row = 0; row < kept.size(); ++row) {
    const std::size_t i = kept[row];
    out.tickers.push_back(panel.tickers[i]);
    double* dst = &out.values[row * t_count];
    for (std::size_t t = 0; t < t_count; ++t)
      dst[t] = panel.is_present(i, t)
                   ? panel.value(i, t)
                   : std::numeric_limits<double>::quiet_NaN();
    // Forward fill, then backward fill the leading gap.
    double last = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t t = 0; t < t_count; ++t) {
      if (std::isnan(dst[t]))
        dst[t] = last;
      else
        last = dst[t];
    }
    std::size_t first_obs = 0;
    while (first_obs < t_count && std::isnan(dst[first_obs])) ++first_obs;
    for (std::size_t t = 0; t < first_obs; ++t) dst[t] = dst[first_obs];
  }
  return out;
}

ReturnsPanel compute_log_returns(const PricePanel& panel) {
  if (!panel.complete())
    throw DataError("compute_log_returns: panel still has missing entries");
  const std::size_t t_count = panel.n_obs();
  if (t_count < 2) throw DataError("compute_log_returns: need T >= 2");

  ReturnsPanel out;
  out.tickers = panel.tickers;
  out.timestamps.assign(panel.timestamps.begin() + 1, panel.timestamps.end());
  out.values.resize(panel.n_series() * (t_count - 1));
  for (std::size_t i = 0; i < panel.n_series(); ++i)
    for (std::size_t t = 1; t < t_count; ++t)
      out.values[i * (t_count - 1) + (t - 1)] =
          std::log(panel.value(i, t) / panel.value(i, t - 1));
  return out;
}

SectorMap load_sector_map(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open sector file: " + path);

  std::string line;
  if (!std::getline(in, line))
    throw DataError("sector file is empty: " + path);
  const auto header = split_line(strip_cr(line), options.delimiter);
  if (header.size() != 2 || header[0] != "ticker" || header[1] != "sector")
    throw DataError("sector header must be `ticker,sector` in " + path);

  SectorMap map;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_line(line, options.delimiter);
    if (fields.size() != 2)
      throw DataError("sector row " + std::to_string(line_no) +
                      ": expected 2 fields");
    if (fields[0].empty() || fields[1].empty())
      throw DataError("sector row " + std::to_string(line_no) +
                      ": empty field");
    if (!map.by_ticker.emplace(fields[0], fields[1]).second)
      throw DataError("duplicate ticker in sector map: " + fields[0]);
  }
  return map;
}

} // namespace sigcd
