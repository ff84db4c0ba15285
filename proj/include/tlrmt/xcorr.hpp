#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "tlrmt/panel.hpp"
#include "tlrmt/stats.hpp"

namespace tlrmt {

/// Estimators for the lag cross-correlation matrix.
///
/// Plain: sample Pearson correlation over the aligned window, masked cells
/// included as the stored zeros.
///
/// OverlapCorrected: the cross-moment is averaged over the T'_ij time points
/// where both cells are unmasked, while each series' mean and sigma are taken
/// over its own unmasked cells in the aligned window. This removes the
/// non-trading-day bias of the plain estimator.
///
/// OverlapUnitDiagonal: OverlapCorrected with the main diagonal replaced by
/// exactly 1 at every lag, so auto-correlations cannot masquerade as
/// cross-correlation structure in the singular spectrum.
enum class CorrEstimator { Plain, OverlapCorrected, OverlapUnitDiagonal };

inline const char* to_string(CorrEstimator e) {
  switch (e) {
    case CorrEstimator::Plain: return "plain";
    case CorrEstimator::OverlapCorrected: return "overlap-corrected";
    case CorrEstimator::OverlapUnitDiagonal: return "overlap-corrected-unit-diagonal";
  }
  return "?";
}

inline CorrEstimator estimator_from_string(const std::string& s) {
  if (s == "plain") return CorrEstimator::Plain;
  if (s == "overlap-corrected" || s == "overlap") return CorrEstimator::OverlapCorrected;
  if (s == "overlap-corrected-unit-diagonal" || s == "unit-diagonal" || s == "unit")
    return CorrEstimator::OverlapUnitDiagonal;
  throw std::invalid_argument("unknown estimator '" + s + "'");
}

/// N x N cross-correlation matrix at a fixed lag, with estimator metadata.
/// effective_overlap(i,j) counts the time points where cell (i,t) and cell
/// (j,t+lag) are both unmasked; entries whose overlap is below
/// kMinReliableOverlap are computed anyway but flagged unreliable.
struct LagCorrMatrix {
  static constexpr int kMinReliableOverlap = 8;

  int lag = 0;
  CorrEstimator estimator = CorrEstimator::Plain;
  std::vector<std::string> names;
  Eigen::MatrixXd values;             // N x N
  Eigen::MatrixXi effective_overlap;  // N x N

  Eigen::Index size() const { return values.rows(); }

  bool reliable(Eigen::Index i, Eigen::Index j) const {
    return effective_overlap(i, j) >= kMinReliableOverlap;
  }

  std::vector<std::pair<int, int>> unreliable_pairs() const {
    std::vector<std::pair<int, int>> out;
    for (Eigen::Index i = 0; i < size(); ++i)
      for (Eigen::Index j = 0; j < size(); ++j)
        if (!reliable(i, j)) out.emplace_back(static_cast<int>(i), static_cast<int>(j));
    return out;
  }
};

/// Eigenvalue support [lambda_minus, lambda_plus] of the Wishart matrix (the
/// correlation matrix of n uncorrelated series of length t), plus the
/// expected off-diagonal standard deviation 1/sqrt(t) of such a matrix.
struct WishartBounds {
  double q = 0.0;  // t / n, > 1
  double lambda_plus = 0.0;
  double lambda_minus = 0.0;
  double sigma_w = 0.0;
};

inline WishartBounds wishart_bounds(Eigen::Index n, Eigen::Index t) {
  if (n < 2) throw std::invalid_argument("wishart_bounds: n >= 2 required");
  if (t <= n) throw std::invalid_argument("wishart_bounds: t > n required (Q must exceed 1)");
  WishartBounds b;
  b.q = static_cast<double>(t) / static_cast<double>(n);
  const double inv_q = 1.0 / b.q;
  b.lambda_plus = 1.0 + inv_q + 2.0 * std::sqrt(inv_q);
  b.lambda_minus = 1.0 + inv_q - 2.0 * std::sqrt(inv_q);
  b.sigma_w = 1.0 / std::sqrt(static_cast<double>(t));
  return b;
}

/// Cross-correlation matrix C(lag) of a return or magnitude panel.
/// values(i,j) correlates series i at time t with series j at time t+lag.
inline LagCorrMatrix corr_matrix(PanelView x, int lag, CorrEstimator estimator) {
  const Eigen::Index n = x.series_count();
  const Eigen::Index t = x.length();
  if (n < 2) throw std::invalid_argument("corr_matrix: need at least 2 series");
  if (lag < 0 || lag > t / 4)
    throw std::invalid_argument("corr_matrix: lag " + std::to_string(lag) +
                                " outside [0, T/4] for T = " + std::to_string(t));
  const Eigen::Index len = t - lag;

  const Eigen::MatrixXd left_raw = x.values->leftCols(len);
  const Eigen::MatrixXd right_raw = x.values->rightCols(len);
  const Eigen::MatrixXd left_ok =
      (!x.mask->leftCols(len)).cast<double>().matrix();
  const Eigen::MatrixXd right_ok =
      (!x.mask->rightCols(len)).cast<double>().matrix();
  // Masked cells are defined to store 0; multiply by the mask anyway so a
  // hand-built panel violating that cannot poison the moments.
  const Eigen::MatrixXd left = left_raw.cwiseProduct(left_ok);
  const Eigen::MatrixXd right = right_raw.cwiseProduct(right_ok);

  LagCorrMatrix out;
  out.lag = lag;
  out.estimator = estimator;
  out.names = *x.names;
  out.effective_overlap = (left_ok * right_ok.transpose()).array().round().cast<int>();

  const Eigen::VectorXd left_count = left_ok.rowwise().sum();
  const Eigen::VectorXd right_count = right_ok.rowwise().sum();
  for (Eigen::Index i = 0; i < n; ++i)
    if (left_count(i) < 2.0 || right_count(i) < 2.0)
      throw std::invalid_argument("corr_matrix: series '" + out.names[static_cast<std::size_t>(i)] +
                                  "' has fewer than 2 usable cells at lag " + std::to_string(lag));

  const double dlen = static_cast<double>(len);
  Eigen::VectorXd mean_left, mean_right, sigma_left, sigma_right;
  if (estimator == CorrEstimator::Plain) {
    mean_left = left.rowwise().sum() / dlen;
    mean_right = right.rowwise().sum() / dlen;
    sigma_left = (left.array().square().matrix().rowwise().sum() / dlen -
                  mean_left.array().square().matrix())
                     .cwiseMax(0.0)
                     .cwiseSqrt();
    sigma_right = (right.array().square().matrix().rowwise().sum() / dlen -
                   mean_right.array().square().matrix())
                      .cwiseMax(0.0)
                      .cwiseSqrt();
  } else {
    mean_left = (left.rowwise().sum().array() / left_count.array()).matrix();
    mean_right = (right.rowwise().sum().array() / right_count.array()).matrix();
    sigma_left = (left.array().square().matrix().rowwise().sum().array() / left_count.array() -
                  mean_left.array().square())
                     .max(0.0)
                     .sqrt()
                     .matrix();
    sigma_right = (right.array().square().matrix().rowwise().sum().array() / right_count.array() -
                   mean_right.array().square())
                      .max(0.0)
                      .sqrt()
                      .matrix();
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (sigma_left(i) <= 0.0 || sigma_right(i) <= 0.0)
      throw std::invalid_argument("corr_matrix: series '" + out.names[static_cast<std::size_t>(i)] +
                                  "' has zero variance at lag " + std::to_string(lag));
  }

  const Eigen::MatrixXd cross = left * right.transpose();  // joint sums; masked cells are zero
  out.values.resize(n, n);
  if (estimator == CorrEstimator::Plain) {
    out.values = ((cross / dlen - mean_left * mean_right.transpose()).array() /
                  (sigma_left * sigma_right.transpose()).array())
                     .matrix();
  } else {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        const int overlap = out.effective_overlap(i, j);
        if (overlap == 0) {
          out.values(i, j) = 0.0;  // no joint observations; flagged unreliable
          continue;
        }
        const double cross_moment = cross(i, j) / static_cast<double>(overlap);
        out.values(i, j) = (cross_moment - mean_left(i) * mean_right(j)) /
                           (sigma_left(i) * sigma_right(j));
      }
    if (estimator == CorrEstimator::OverlapUnitDiagonal)
      out.values.diagonal().setOnes();
  }
  return out;
}

/// Histogram of the N(N-1)/2 upper-triangle correlations plus the matched
/// noise reference (normal, mean 0, std 1/sqrt(T_effective)) and the
/// Kolmogorov-Smirnov distance between the two.
struct OffdiagHistogram {
  std::vector<double> bin_edges;  // bins + 1
  std::vector<int> counts;        // bins
  std::size_t n_samples = 0;
  double sigma_reference = 0.0;
  double ks_distance = 0.0;
  double ks_critical_5pct = 0.0;
};

inline OffdiagHistogram offdiag_histogram(const LagCorrMatrix& c, int bins) {
  const Eigen::Index n = c.size();
  if (n < 3) throw std::invalid_argument("offdiag_histogram: need N >= 3");
  if (bins < 1) throw std::invalid_argument("offdiag_histogram: bins >= 1 required");

  std::vector<double> samples;
  double overlap_sum = 0.0;
  samples.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      samples.push_back(c.values(i, j));
      overlap_sum += c.effective_overlap(i, j);
    }

  OffdiagHistogram h;
  h.n_samples = samples.size();
  const double t_eff = overlap_sum / static_cast<double>(samples.size());
  h.sigma_reference = 1.0 / std::sqrt(std::max(t_eff, 1.0));

  double lo = samples[0], hi = samples[0];
  for (double v : samples) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / bins;
  h.bin_edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int b = 0; b <= bins; ++b) h.bin_edges[static_cast<std::size_t>(b)] = lo + width * b;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double v : samples) {
    int b = static_cast<int>((v - lo) / width);
    b = std::clamp(b, 0, bins - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }

  const double sigma = h.sigma_reference;
  h.ks_distance = ks_distance(samples, [sigma](double v) { return normal_cdf(v / sigma); });
  h.ks_critical_5pct = ks_critical_5pct(samples.size());
  return h;
}

}  // namespace tlrmt
