#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tlrmt/factor.hpp"
#include "tlrmt/garch.hpp"
#include "tlrmt/panel.hpp"
#include "tlrmt/simulate.hpp"
#include "tlrmt/spectrum.hpp"
#include "tlrmt/xcorr.hpp"

namespace tlrmt {

/// All numeric CSV output uses 12 significant digits so repeated runs are
/// byte-comparable.
inline std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

namespace detail {

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Panels. Cache format is the ingest CSV format itself: header
// `date,<names...>`, one row per timestamp, empty field = masked/missing.
// ---------------------------------------------------------------------------

inline void write_return_panel_csv(const ReturnPanel& panel, const std::string& path) {
  auto out = detail::open_out(path);
  out << "date";
  for (const auto& name : panel.names) out << ',' << name;
  out << '\n';
  for (Eigen::Index k = 0; k < panel.length(); ++k) {
    out << panel.timestamps[static_cast<std::size_t>(k)];
    for (Eigen::Index i = 0; i < panel.series_count(); ++i) {
      out << ',';
      if (!panel.zero_mask(i, k)) out << fmt12(panel.values(i, k));
    }
    out << '\n';
  }
}

inline void write_price_panel_csv(const PricePanel& panel, const std::string& path) {
  auto out = detail::open_out(path);
  out << "date";
  for (const auto& name : panel.names) out << ',' << name;
  out << '\n';
  for (Eigen::Index k = 0; k < panel.length(); ++k) {
    out << panel.timestamps[static_cast<std::size_t>(k)];
    for (Eigen::Index i = 0; i < panel.series_count(); ++i) {
      out << ',';
      if (!panel.missing(i, k)) out << fmt12(panel.values(i, k));
    }
    out << '\n';
  }
}

/// Reads a cached return (or magnitude) panel: any real values allowed,
/// empty cells become masked zeros.
inline ReturnPanel read_return_panel_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty panel file '" + path + "'");
  const auto header = detail::split_csv_line(line);
  if (header.size() < 3) throw std::runtime_error("panel '" + path + "' has fewer than 2 series");

  ReturnPanel panel;
  for (std::size_t i = 1; i < header.size(); ++i) panel.names.emplace_back(header[i]);
  const std::size_t n = panel.names.size();
  std::vector<std::vector<double>> rows;
  std::vector<std::vector<bool>> masks;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != n + 1)
      throw std::runtime_error("panel '" + path + "' row " + std::to_string(row_no) +
                               ": wrong field count");
    panel.timestamps.emplace_back(fields[0]);
    std::vector<double> v(n, 0.0);
    std::vector<bool> m(n, false);
    for (std::size_t j = 0; j < n; ++j) {
      double x = 0.0;
      if (fields[j + 1].empty()) {
        m[j] = true;
      } else if (!detail::parse_double(fields[j + 1], x)) {
        throw std::runtime_error("panel '" + path + "' row " + std::to_string(row_no) +
                                 ", column '" + panel.names[j] + "': cannot parse value");
      } else {
        v[j] = x;
        if (x == 0.0) m[j] = true;  // masked cells store exactly 0
      }
    }
    rows.push_back(std::move(v));
    masks.push_back(std::move(m));
  }
  const std::size_t t = rows.size();
  if (t < 2) throw std::runtime_error("panel '" + path + "' has fewer than 2 rows");
  panel.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(t));
  panel.zero_mask.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(t));
  for (std::size_t k = 0; k < t; ++k)
    for (std::size_t j = 0; j < n; ++j) {
      panel.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) =
          masks[k][j] ? 0.0 : rows[k][j];
      panel.zero_mask(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = masks[k][j];
    }
  return panel;
}

/// Single time series CSV: `date,<name>` header, one value per row.
struct SeriesCsv {
  std::string name;
  std::vector<std::string> timestamps;
  std::vector<double> values;
};

inline SeriesCsv read_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty series file '" + path + "'");
  const auto header = detail::split_csv_line(line);
  if (header.size() < 2) throw std::runtime_error("series '" + path + "': need a value column");
  SeriesCsv s;
  s.name = std::string(header[1]);
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() < 2)
      throw std::runtime_error("series '" + path + "' row " + std::to_string(row_no) +
                               ": missing value");
    double v = 0.0;
    if (!detail::parse_double(fields[1], v))
      throw std::runtime_error("series '" + path + "' row " + std::to_string(row_no) +
                               ": cannot parse value");
    s.timestamps.emplace_back(fields[0]);
    s.values.push_back(v);
  }
  if (s.values.empty()) throw std::runtime_error("series '" + path + "' has no rows");
  return s;
}

inline void write_series_csv(const std::string& name, const std::vector<std::string>& timestamps,
                             std::span<const double> values, const std::string& path) {
  if (timestamps.size() != values.size())
    throw std::invalid_argument("write_series_csv: timestamp/value size mismatch");
  auto out = detail::open_out(path);
  out << "date," << name << '\n';
  for (std::size_t k = 0; k < values.size(); ++k)
    out << timestamps[k] << ',' << fmt12(values[k]) << '\n';
}

// ---------------------------------------------------------------------------
// Correlation matrices
// ---------------------------------------------------------------------------

inline void write_matrix_csv(const LagCorrMatrix& m, const std::string& path) {
  auto out = detail::open_out(path);
  out << "name";
  for (const auto& name : m.names) out << ',' << name;
  out << '\n';
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    out << m.names[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m.size(); ++j) out << ',' << fmt12(m.values(i, j));
    out << '\n';
  }
}

/// Metadata envelope: lag, estimator, and the overlap bookkeeping.
inline nlohmann::json matrix_envelope(const LagCorrMatrix& m) {
  nlohmann::json j;
  j["lag"] = m.lag;
  j["estimator"] = to_string(m.estimator);
  j["names"] = m.names;
  int min_overlap = m.effective_overlap(0, 0), max_overlap = min_overlap;
  for (Eigen::Index i = 0; i < m.size(); ++i)
    for (Eigen::Index jdx = 0; jdx < m.size(); ++jdx) {
      min_overlap = std::min(min_overlap, m.effective_overlap(i, jdx));
      max_overlap = std::max(max_overlap, m.effective_overlap(i, jdx));
    }
  j["effective_overlap"] = {{"min", min_overlap}, {"max", max_overlap}};
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [a, b] : m.unreliable_pairs()) pairs.push_back({a, b});
  j["unreliable_pairs"] = pairs;
  return j;
}

// ---------------------------------------------------------------------------
// Spectrum curves and fits
// ---------------------------------------------------------------------------

inline void write_curve_csv(const SpectrumCurve& curve, const std::string& path) {
  auto out = detail::open_out(path);
  out << "lag,lambda_L\n";
  for (std::size_t k = 0; k < curve.lags.size(); ++k)
    out << curve.lags[k] << ',' << fmt12(curve.lambda_max[k]) << '\n';
}

inline nlohmann::json power_law_json(const PowerLawFit& fit) {
  return {{"exponent", fit.exponent},
          {"amplitude", fit.amplitude},
          {"fit_range", {fit.fit_min, fit.fit_max}},
          {"r_squared", fit.r_squared}};
}

// ---------------------------------------------------------------------------
// Factor decomposition
// ---------------------------------------------------------------------------

inline nlohmann::json factor_json(const FactorDecomposition& d, double screen_threshold = 0.1) {
  const VarianceShares shares = variance_shares(d);
  const std::vector<double> corr = factor_index_corr(d);
  nlohmann::json j;
  j["eigenvalues"] = std::vector<double>(d.eigenvalues.data(),
                                         d.eigenvalues.data() + d.eigenvalues.size());
  j["n_significant"] = d.n_significant;
  j["shares"]["total"] = shares.share_total;
  if (shares.share_significant)
    j["shares"]["significant"] = *shares.share_significant;
  else
    j["shares"]["significant"] = nullptr;
  j["loadings"] = std::vector<double>(d.loadings.data(), d.loadings.data() + d.loadings.size());
  j["factor_index_correlations"] = corr;
  j["wishart"] = {{"q", d.bounds.q},
                  {"lambda_plus", d.bounds.lambda_plus},
                  {"lambda_minus", d.bounds.lambda_minus},
                  {"sigma_w", d.bounds.sigma_w}};
  j["uncorrelated"] = screen_uncorrelated(d.names, corr, screen_threshold);
  return j;
}

// ---------------------------------------------------------------------------
// GARCH fits
// ---------------------------------------------------------------------------

inline nlohmann::json garch_fit_json(const GjrGarchFit& fit) {
  const char* names[4] = {"alpha0", "alpha1", "beta1", "gamma"};
  const double values[4] = {fit.params.alpha0, fit.params.alpha1, fit.params.beta1,
                            fit.params.gamma};
  nlohmann::json j;
  for (int k = 0; k < 4; ++k) {
    const auto i = static_cast<std::size_t>(k);
    j["params"][names[k]] = values[k];
    j["std_errors"][names[k]] = fit.std_errors[i];
    j["t_values"][names[k]] = fit.t_values[i];
    j["p_values"][names[k]] = fit.p_values[i];
  }
  j["loglik"] = fit.loglik;
  j["persistence"] = fit.params.persistence();
  j["unconditional_variance"] = unconditional_variance(fit.params);
  return j;
}

inline void write_forecast_csv(std::span<const double> path_values, const std::string& path) {
  auto out = detail::open_out(path);
  out << "horizon,expected_variance\n";
  for (std::size_t h = 0; h < path_values.size(); ++h)
    out << (h + 1) << ',' << fmt12(path_values[h]) << '\n';
}

// ---------------------------------------------------------------------------
// Scenario files
// ---------------------------------------------------------------------------

namespace detail {

inline Eigen::VectorXd vector_field(const nlohmann::json& j, const std::string& key,
                                    Eigen::Index n) {
  if (!j.contains(key)) throw std::runtime_error("scenario: missing field '" + key + "'");
  const auto& v = j.at(key);
  Eigen::VectorXd out(n);
  if (v.is_number()) {
    out.setConstant(v.get<double>());
  } else if (v.is_array()) {
    if (static_cast<Eigen::Index>(v.size()) != n)
      throw std::runtime_error("scenario: field '" + key + "' must have length n");
    for (Eigen::Index i = 0; i < n; ++i) out(i) = v[static_cast<std::size_t>(i)].get<double>();
  } else {
    throw std::runtime_error("scenario: field '" + key + "' must be a number or array");
  }
  return out;
}

}  // namespace detail

inline GfmScenario scenario_from_json(const nlohmann::json& j) {
  GfmScenario s;
  s.n = j.at("n").get<Eigen::Index>();
  s.t = j.at("t").get<Eigen::Index>();
  s.mu = detail::vector_field(j, "mu", s.n);
  s.b = detail::vector_field(j, "b", s.n);
  s.sigma_eps = detail::vector_field(j, "sigma_eps", s.n);
  const auto& f = j.at("factor");
  s.factor_params = {f.at("alpha0").get<double>(), f.at("alpha1").get<double>(),
                     f.at("beta1").get<double>(), f.at("gamma").get<double>()};
  s.holiday_prob = j.value("holiday_prob", 0.0);
  s.seed = j.value("seed", std::uint64_t{0});
  s.validate();
  return s;
}

inline GfmScenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario '" + path + "'");
  nlohmann::json j;
  in >> j;
  return scenario_from_json(j);
}

inline void write_json(const nlohmann::json& j, const std::string& path) {
  auto out = detail::open_out(path);
  out << j.dump(2) << '\n';
}

}  // namespace tlrmt
