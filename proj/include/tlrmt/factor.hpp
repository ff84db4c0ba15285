#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tlrmt/panel.hpp"
#include "tlrmt/spectrum.hpp"
#include "tlrmt/stats.hpp"
#include "tlrmt/xcorr.hpp"

namespace tlrmt {

/// Return panel with every row scaled to mean 0 and standard deviation 1
/// over its unmasked cells; masked cells carry 0 and never enter moments.
struct StandardizedPanel {
  std::vector<std::string> names;
  std::vector<std::string> timestamps;
  Eigen::MatrixXd z;  // N x T
  MaskArray mask;
  Eigen::VectorXd row_means;
  Eigen::VectorXd row_sigmas;

  Eigen::Index series_count() const { return z.rows(); }
  Eigen::Index length() const { return z.cols(); }
};

inline StandardizedPanel standardize(const ReturnPanel& panel) {
  const Eigen::Index n = panel.series_count();
  const Eigen::Index t = panel.length();
  StandardizedPanel out;
  out.names = panel.names;
  out.timestamps = panel.timestamps;
  out.mask = panel.zero_mask;
  out.z = Eigen::MatrixXd::Zero(n, t);
  out.row_means.resize(n);
  out.row_sigmas.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double sum = 0.0, sum2 = 0.0;
    Eigen::Index count = 0;
    for (Eigen::Index k = 0; k < t; ++k)
      if (!panel.zero_mask(i, k)) {
        sum += panel.values(i, k);
        sum2 += panel.values(i, k) * panel.values(i, k);
        ++count;
      }
    if (count < 2)
      throw std::invalid_argument("standardize: series '" + panel.names[static_cast<std::size_t>(i)] +
                                  "' has fewer than 2 unmasked cells");
    const double m = sum / static_cast<double>(count);
    const double var = sum2 / static_cast<double>(count) - m * m;
    if (!(var > 0.0))
      throw std::invalid_argument("standardize: series '" + panel.names[static_cast<std::size_t>(i)] +
                                  "' has zero variance");
    const double sigma = std::sqrt(var);
    out.row_means(i) = m;
    out.row_sigmas(i) = sigma;
    for (Eigen::Index k = 0; k < t; ++k)
      if (!panel.zero_mask(i, k)) out.z(i, k) = (panel.values(i, k) - m) / sigma;
  }
  return out;
}

/// PCA of the return correlation matrix C = (1/T) z z^T. The first principal
/// component is the global-factor estimate; loadings, residuals, and the
/// RMT significance count come with it.
struct FactorDecomposition {
  std::vector<std::string> names;
  std::vector<std::string> timestamps;
  Eigen::VectorXd eigenvalues;   // descending
  Eigen::MatrixXd eigenvectors;  // column k = u_k, sign-fixed
  Eigen::MatrixXd pcs;           // N x T, row k = alpha_k
  Eigen::VectorXd loadings;      // b_i = sigma(R_i) * u_1i
  Eigen::MatrixXd residuals;     // epsilon_{i,t} = sigma(R_i) * (z - u_1 alpha_1)
  Eigen::VectorXd row_sigmas;
  MaskArray mask;
  WishartBounds bounds;
  int n_significant = 0;

  Eigen::Index series_count() const { return eigenvalues.size(); }
  Eigen::Index length() const { return pcs.cols(); }

  /// The global factor M_t = alpha_1.
  Eigen::VectorXd global_factor() const { return pcs.row(0); }
};

inline FactorDecomposition decompose(const StandardizedPanel& panel) {
  const Eigen::Index n = panel.series_count();
  const Eigen::Index t = panel.length();
  if (n < 2) throw std::invalid_argument("decompose: need at least 2 series");
  if (n >= t) throw std::invalid_argument("decompose: N < T required");

  const Eigen::MatrixXd corr = (panel.z * panel.z.transpose()) / static_cast<double>(t);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(corr);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("decompose: eigensolver failed to converge on the " +
                             std::to_string(n) + "x" + std::to_string(n) +
                             " correlation matrix");

  FactorDecomposition d;
  d.names = panel.names;
  d.timestamps = panel.timestamps;
  d.row_sigmas = panel.row_sigmas;
  d.mask = panel.mask;
  d.eigenvalues.resize(n);
  d.eigenvectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    d.eigenvalues(k) = solver.eigenvalues()(n - 1 - k);
    d.eigenvectors.col(k) = solver.eigenvectors().col(n - 1 - k);
  }
  // PCA signs are arbitrary; fix each eigenvector to positive component sum so
  // the factor is the positively oriented market mode and output deterministic.
  // Ties (sum exactly 0) fall back to the first non-zero component's sign.
  for (Eigen::Index k = 0; k < n; ++k) {
    double sum = d.eigenvectors.col(k).sum();
    if (sum == 0.0) {
      for (Eigen::Index i = 0; i < n; ++i)
        if (d.eigenvectors(i, k) != 0.0) {
          sum = d.eigenvectors(i, k);
          break;
        }
    }
    if (sum < 0.0) d.eigenvectors.col(k) = -d.eigenvectors.col(k);
  }

  d.pcs = d.eigenvectors.transpose() * panel.z;
  d.loadings = d.row_sigmas.cwiseProduct(d.eigenvectors.col(0));
  d.residuals = d.row_sigmas.asDiagonal() *
                (panel.z - d.eigenvectors.col(0) * d.pcs.row(0));

  d.bounds = wishart_bounds(n, t);
  d.n_significant = 0;
  for (Eigen::Index k = 0; k < n; ++k)
    if (d.eigenvalues(k) > d.bounds.lambda_plus) ++d.n_significant;
  return d;
}

/// share_total = lambda_1 / sum(lambda); share_significant = lambda_1 over
/// the sum of the RMT-significant eigenvalues (absent when none exceed
/// lambda_plus).
struct VarianceShares {
  double share_total = 0.0;
  std::optional<double> share_significant;
};

inline VarianceShares variance_shares(std::span<const double> eigenvalues, int n_significant) {
  if (eigenvalues.empty()) throw std::invalid_argument("variance_shares: no eigenvalues");
  if (n_significant < 0 || static_cast<std::size_t>(n_significant) > eigenvalues.size())
    throw std::invalid_argument("variance_shares: n_significant out of range");
  double total = 0.0;
  for (double v : eigenvalues) total += v;
  if (!(total > 0.0)) throw std::invalid_argument("variance_shares: non-positive trace");
  VarianceShares s;
  s.share_total = eigenvalues[0] / total;
  if (n_significant >= 1) {
    double sig = 0.0;
    for (int k = 0; k < n_significant; ++k) sig += eigenvalues[static_cast<std::size_t>(k)];
    s.share_significant = eigenvalues[0] / sig;
  }
  return s;
}

inline VarianceShares variance_shares(const FactorDecomposition& d) {
  return variance_shares(std::span<const double>(d.eigenvalues.data(),
                                                 static_cast<std::size_t>(d.eigenvalues.size())),
                         d.n_significant);
}

/// Corr(M_t, R_i) = sqrt(lambda_1) * u_1i, clamped to [-1, 1].
inline std::vector<double> factor_index_corr(const FactorDecomposition& d) {
  const double root = std::sqrt(std::max(d.eigenvalues(0), 0.0));
  std::vector<double> out(static_cast<std::size_t>(d.series_count()));
  for (Eigen::Index i = 0; i < d.series_count(); ++i)
    out[static_cast<std::size_t>(i)] = std::clamp(root * d.eigenvectors(i, 0), -1.0, 1.0);
  return out;
}

/// Names of the series whose |correlation with the factor| is below the
/// threshold, sorted ascending by |correlation|.
inline std::vector<std::string> screen_uncorrelated(const std::vector<std::string>& names,
                                                    const std::vector<double>& correlations,
                                                    double threshold = 0.1) {
  if (names.size() != correlations.size())
    throw std::invalid_argument("screen_uncorrelated: names/correlations size mismatch");
  if (!(threshold > 0.0 && threshold < 1.0))
    throw std::invalid_argument("screen_uncorrelated: threshold must be in (0, 1)");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < correlations.size(); ++i)
    if (std::abs(correlations[i]) < threshold) idx.push_back(i);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(correlations[a]) < std::abs(correlations[b]);
  });
  std::vector<std::string> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(names[i]);
  return out;
}

/// Sample autocorrelation with the 95% no-autocorrelation band and a
/// Ljung-Box portmanteau check.
struct AcfReport {
  std::vector<double> acf;  // index = lag, acf[0] == 1
  double ci_halfwidth = 0.0;
  int ljung_box_lags = 0;
  double ljung_box_stat = 0.0;
  double ljung_box_pvalue = 0.0;
};

inline AcfReport acf(std::span<const double> series, int max_lag, int ljung_box_lags = 20) {
  const auto t = static_cast<Eigen::Index>(series.size());
  if (max_lag < 1) throw std::invalid_argument("acf: max_lag >= 1 required");
  if (max_lag >= t / 4)
    throw std::invalid_argument("acf: max_lag must be below T/4 (T = " + std::to_string(t) + ")");
  const double m = mean(series);
  double denom = 0.0;
  for (double v : series) denom += (v - m) * (v - m);
  if (!(denom > 0.0)) throw std::invalid_argument("acf: constant series");

  AcfReport rep;
  rep.acf.resize(static_cast<std::size_t>(max_lag) + 1);
  rep.acf[0] = 1.0;
  for (int k = 1; k <= max_lag; ++k) {
    double num = 0.0;
    for (Eigen::Index i = 0; i + k < t; ++i)
      num += (series[static_cast<std::size_t>(i)] - m) *
             (series[static_cast<std::size_t>(i + k)] - m);
    rep.acf[static_cast<std::size_t>(k)] = num / denom;
  }
  rep.ci_halfwidth = 1.96 / std::sqrt(static_cast<double>(t));

  const int h = std::min(ljung_box_lags, max_lag);
  rep.ljung_box_lags = h;
  double q = 0.0;
  for (int k = 1; k <= h; ++k) {
    const double rho = rep.acf[static_cast<std::size_t>(k)];
    q += rho * rho / static_cast<double>(t - k);
  }
  rep.ljung_box_stat = static_cast<double>(t) * (static_cast<double>(t) + 2.0) * q;
  rep.ljung_box_pvalue = chi_squared_sf(rep.ljung_box_stat, h);
  return rep;
}

/// Residuals repackaged as a ReturnPanel (masked cells zeroed, masks kept) so
/// the spectrum pipeline can run on them unchanged.
inline ReturnPanel residual_returns(const FactorDecomposition& d) {
  ReturnPanel out;
  out.names = d.names;
  out.timestamps = d.timestamps;
  out.zero_mask = d.mask;
  out.values = d.residuals;
  for (Eigen::Index i = 0; i < out.values.rows(); ++i)
    for (Eigen::Index k = 0; k < out.values.cols(); ++k)
      if (out.zero_mask(i, k)) out.values(i, k) = 0.0;
  return out;
}

/// Largest-singular-value curve of the residual panel (or of residual
/// magnitudes), for checking how much cross-correlation the factor removed.
inline SpectrumCurve residual_spectrum(const FactorDecomposition& d, const std::vector<int>& lags,
                                       bool use_magnitudes = false,
                                       CorrEstimator estimator = CorrEstimator::OverlapUnitDiagonal,
                                       unsigned n_threads = 0) {
  const ReturnPanel res = residual_returns(d);
  if (use_magnitudes) {
    const MagnitudePanel mag = to_magnitudes(res);
    return lambda_curve(mag, lags, estimator, SpectrumSource::Residuals, false, n_threads);
  }
  return lambda_curve(res, lags, estimator, SpectrumSource::Residuals, false, n_threads);
}

}  // namespace tlrmt
