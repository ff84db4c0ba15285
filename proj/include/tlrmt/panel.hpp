#pragma once

#include <Eigen/Core>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tlrmt {

using MaskArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// N x T panel of strictly positive price levels. Missing observations are
/// flagged in `missing` (the stored value at those cells is meaningless).
struct PricePanel {
  std::vector<std::string> names;       // N series identifiers
  std::vector<std::string> timestamps;  // T ordered labels, strictly increasing
  Eigen::MatrixXd values;               // N x T
  MaskArray missing;                    // N x T

  Eigen::Index series_count() const { return values.rows(); }
  Eigen::Index length() const { return values.cols(); }
};

/// N x (T-1) panel of log returns. zero_mask marks cells treated as
/// non-trading (missing prices or exact-zero returns); a masked cell always
/// stores exactly 0. Rows with fewer than two unmasked cells are tolerated
/// here but rejected by every downstream moment computation.
struct ReturnPanel {
  std::vector<std::string> names;
  std::vector<std::string> timestamps;  // label of the later price of each return
  Eigen::MatrixXd values;               // N x (T-1)
  MaskArray zero_mask;                  // N x (T-1)

  Eigen::Index series_count() const { return values.rows(); }
  Eigen::Index length() const { return values.cols(); }
};

/// Same shape as the ReturnPanel it came from; values are |R - row mean|
/// with the row mean taken over unmasked cells only.
struct MagnitudePanel {
  std::vector<std::string> names;
  std::vector<std::string> timestamps;
  Eigen::MatrixXd values;  // >= 0
  MaskArray zero_mask;

  Eigen::Index series_count() const { return values.rows(); }
  Eigen::Index length() const { return values.cols(); }
};

/// Read-only view shared by ReturnPanel and MagnitudePanel so correlation and
/// spectrum code can take either.
struct PanelView {
  const std::vector<std::string>* names;
  const Eigen::MatrixXd* values;
  const MaskArray* mask;

  PanelView(const ReturnPanel& p) : names(&p.names), values(&p.values), mask(&p.zero_mask) {}
  PanelView(const MagnitudePanel& p) : names(&p.names), values(&p.values), mask(&p.zero_mask) {}

  Eigen::Index series_count() const { return values->rows(); }
  Eigen::Index length() const { return values->cols(); }
};

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

inline bool parse_double(std::string_view s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  while (last != first && (*(last - 1) == ' ' || *(last - 1) == '\t')) --last;
  if (first == last) return false;
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc{} && res.ptr == last;
}

}  // namespace detail

/// Parses a price CSV with header `date,<name1>,...,<nameN>`. Empty fields
/// become missing cells. Timestamps are opaque labels that must be strictly
/// increasing as strings (ISO-8601 dates order correctly).
inline PricePanel ingest_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("ingest_csv: cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("ingest_csv: empty file '" + path + "'");
  const auto header = detail::split_csv_line(line);
  if (header.size() < 3)
    throw std::runtime_error("ingest_csv: fewer than 2 series in '" + path + "'");

  PricePanel panel;
  for (std::size_t i = 1; i < header.size(); ++i) panel.names.emplace_back(header[i]);
  const std::size_t n = panel.names.size();

  std::vector<std::vector<double>> cols;   // per time step
  std::vector<std::vector<bool>> missing;  // per time step
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != n + 1)
      throw std::runtime_error("ingest_csv: row " + std::to_string(row_no) + " has " +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(n + 1));
    std::string stamp(fields[0]);
    if (!panel.timestamps.empty() && stamp <= panel.timestamps.back())
      throw std::runtime_error("ingest_csv: non-monotone timestamps at row " +
                               std::to_string(row_no) + " ('" + stamp + "')");
    panel.timestamps.push_back(std::move(stamp));
    std::vector<double> v(n, 0.0);
    std::vector<bool> m(n, false);
    for (std::size_t j = 0; j < n; ++j) {
      double x = 0.0;
      if (fields[j + 1].empty() || fields[j + 1] == "\r") {
        m[j] = true;
      } else if (!detail::parse_double(fields[j + 1], x)) {
        throw std::runtime_error("ingest_csv: row " + std::to_string(row_no) + ", column '" +
                                 panel.names[j] + "': cannot parse '" +
                                 std::string(fields[j + 1]) + "'");
      } else if (!(x > 0.0) || !std::isfinite(x)) {
        throw std::runtime_error("ingest_csv: non-positive price at row " +
                                 std::to_string(row_no) + " (timestamp '" +
                                 panel.timestamps.back() + "'), column '" + panel.names[j] + "'");
      } else {
        v[j] = x;
      }
    }
    cols.push_back(std::move(v));
    missing.push_back(std::move(m));
  }

  const std::size_t t = cols.size();
  if (t < 3) throw std::runtime_error("ingest_csv: need at least 3 rows, got " + std::to_string(t));
  panel.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(t));
  panel.missing.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(t));
  for (std::size_t k = 0; k < t; ++k)
    for (std::size_t j = 0; j < n; ++j) {
      panel.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = cols[k][j];
      panel.missing(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = missing[k][j];
    }
  return panel;
}

/// Log returns R(i,t) = ln S(i,t+1) - ln S(i,t). A missing price masks both
/// adjacent returns. Exact-zero returns are masked as non-trading days unless
/// mask_zero_returns is false.
inline ReturnPanel to_returns(const PricePanel& panel, bool mask_zero_returns = true) {
  const Eigen::Index n = panel.series_count();
  const Eigen::Index t = panel.length();
  if (n < 2 || t < 3) throw std::invalid_argument("to_returns: panel must be at least 2 x 3");

  ReturnPanel out;
  out.names = panel.names;
  out.timestamps.assign(panel.timestamps.begin() + 1, panel.timestamps.end());
  out.values = Eigen::MatrixXd::Zero(n, t - 1);
  out.zero_mask = MaskArray::Constant(n, t - 1, false);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k + 1 < t; ++k) {
      if (panel.missing(i, k) || panel.missing(i, k + 1)) {
        out.zero_mask(i, k) = true;
        continue;
      }
      const double r = std::log(panel.values(i, k + 1)) - std::log(panel.values(i, k));
      if (r == 0.0 && mask_zero_returns) {
        out.zero_mask(i, k) = true;
      } else {
        out.values(i, k) = r;
      }
    }
  }
  return out;
}

/// |R - row mean| with the mean over each row's unmasked cells. Masked cells
/// stay masked and store 0.
inline MagnitudePanel to_magnitudes(const ReturnPanel& panel) {
  const Eigen::Index n = panel.series_count();
  const Eigen::Index t = panel.length();
  MagnitudePanel out;
  out.names = panel.names;
  out.timestamps = panel.timestamps;
  out.values = Eigen::MatrixXd::Zero(n, t);
  out.zero_mask = panel.zero_mask;
  for (Eigen::Index i = 0; i < n; ++i) {
    double sum = 0.0;
    Eigen::Index count = 0;
    for (Eigen::Index k = 0; k < t; ++k)
      if (!panel.zero_mask(i, k)) {
        sum += panel.values(i, k);
        ++count;
      }
    if (count < 2)
      throw std::invalid_argument("to_magnitudes: series '" + panel.names[static_cast<std::size_t>(i)] +
                                  "' has fewer than 2 unmasked cells");
    const double row_mean = sum / static_cast<double>(count);
    for (Eigen::Index k = 0; k < t; ++k)
      if (!panel.zero_mask(i, k)) out.values(i, k) = std::abs(panel.values(i, k) - row_mean);
  }
  return out;
}

}  // namespace tlrmt
