#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "tlrmt/parallel.hpp"
#include "tlrmt/stats.hpp"
#include "tlrmt/xcorr.hpp"

namespace tlrmt {

enum class SpectrumSource { Returns, Magnitudes, Residuals };

inline const char* to_string(SpectrumSource s) {
  switch (s) {
    case SpectrumSource::Returns: return "returns";
    case SpectrumSource::Magnitudes: return "magnitudes";
    case SpectrumSource::Residuals: return "residuals";
  }
  return "?";
}

/// Largest singular value of the lag correlation matrix as a function of lag.
/// full_spectra is populated only when requested from lambda_curve.
struct SpectrumCurve {
  SpectrumSource source = SpectrumSource::Returns;
  std::vector<int> lags;
  std::vector<double> lambda_max;
  std::vector<std::vector<double>> full_spectra;

  double at(int lag) const {
    for (std::size_t i = 0; i < lags.size(); ++i)
      if (lags[i] == lag) return lambda_max[i];
    throw std::out_of_range("SpectrumCurve: lag " + std::to_string(lag) + " not in curve");
  }
};

/// Power-law fit lambda ~ amplitude * lag^(-exponent) from log-log OLS.
struct PowerLawFit {
  double exponent = 0.0;  // positive decay rate
  double amplitude = 0.0;
  int fit_min = 0;
  int fit_max = 0;
  double r_squared = 0.0;
};

/// Singular values in descending order, computed as the square roots of the
/// eigenvalues of C^T C (symmetric eigensolve is more robust here than a
/// general SVD and we need the full spectrum for the RMT band checks anyway).
inline std::vector<double> svd_spectrum(const Eigen::MatrixXd& c) {
  if (c.rows() != c.cols() || c.rows() == 0)
    throw std::invalid_argument("svd_spectrum: square matrix required");
  if (!c.allFinite()) throw std::invalid_argument("svd_spectrum: non-finite entry");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(c.transpose() * c);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("svd_spectrum: eigensolver failed to converge");
  const Eigen::VectorXd ev = solver.eigenvalues();  // ascending
  std::vector<double> out(static_cast<std::size_t>(ev.size()));
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    out[static_cast<std::size_t>(ev.size() - 1 - i)] = std::sqrt(std::max(ev(i), 0.0));
  return out;
}

inline std::vector<double> svd_spectrum(const LagCorrMatrix& c) { return svd_spectrum(c.values); }

/// Builds the lag correlation matrix per lag (unit-diagonal overlap estimator
/// by default) and records the largest singular value. Lags are computed
/// concurrently.
inline SpectrumCurve lambda_curve(PanelView x, const std::vector<int>& lags,
                                  CorrEstimator estimator = CorrEstimator::OverlapUnitDiagonal,
                                  SpectrumSource source = SpectrumSource::Returns,
                                  bool keep_full_spectra = false, unsigned n_threads = 0) {
  if (lags.empty()) throw std::invalid_argument("lambda_curve: empty lag list");
  SpectrumCurve curve;
  curve.source = source;
  curve.lags = lags;
  curve.lambda_max.assign(lags.size(), 0.0);
  if (keep_full_spectra) curve.full_spectra.assign(lags.size(), {});
  parallel_for(
      lags.size(),
      [&](std::size_t k) {
        const auto spectrum = svd_spectrum(corr_matrix(x, lags[k], estimator));
        curve.lambda_max[k] = spectrum.front();
        if (keep_full_spectra) curve.full_spectra[k] = spectrum;
      },
      n_threads);
  return curve;
}

/// OLS on (ln lag, ln lambda) over lags in [fit_min, fit_max]. The exponent
/// is reported as a positive decay rate.
inline PowerLawFit fit_power_law(const SpectrumCurve& curve, int fit_min, int fit_max) {
  if (fit_min < 1) throw std::invalid_argument("fit_power_law: fit range must start at lag >= 1");
  if (fit_max < fit_min) throw std::invalid_argument("fit_power_law: empty fit range");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < curve.lags.size(); ++i) {
    const int lag = curve.lags[i];
    if (lag < fit_min || lag > fit_max) continue;
    const double v = curve.lambda_max[i];
    if (!(v > 0.0))
      throw std::invalid_argument("fit_power_law: non-positive lambda at lag " +
                                  std::to_string(lag));
    lx.push_back(std::log(static_cast<double>(lag)));
    ly.push_back(std::log(v));
  }
  if (lx.size() < 5)
    throw std::invalid_argument("fit_power_law: need at least 5 lags in range, got " +
                                std::to_string(lx.size()));
  const LineFit line = fit_line(lx, ly);
  PowerLawFit fit;
  fit.exponent = -line.slope;
  fit.amplitude = std::exp(line.intercept);
  fit.fit_min = fit_min;
  fit.fit_max = fit_max;
  fit.r_squared = line.r_squared;
  return fit;
}

}  // namespace tlrmt
