#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "tlrmt/garch.hpp"
#include "tlrmt/panel.hpp"
#include "tlrmt/rng.hpp"

namespace tlrmt {

/// Declarative single-factor scenario: R_{i,t} = mu_i + b_i M_t + eps_{i,t}
/// with a GJR-GARCH(1,1) factor, independent Gaussian residuals, and i.i.d.
/// per-cell holiday masking. Everything is reproducible from the seed.
struct GfmScenario {
  Eigen::Index n = 0;
  Eigen::Index t = 0;
  Eigen::VectorXd mu;         // per-series drift
  Eigen::VectorXd b;          // per-series factor loading
  Eigen::VectorXd sigma_eps;  // per-series residual std, > 0
  GjrGarchParams factor_params;
  double holiday_prob = 0.0;  // in [0, 0.2]
  std::uint64_t seed = 0;

  void validate() const {
    if (n < 2) throw std::invalid_argument("GfmScenario: n >= 2 required");
    if (t < 100) throw std::invalid_argument("GfmScenario: t >= 100 required");
    if (mu.size() != n || b.size() != n || sigma_eps.size() != n)
      throw std::invalid_argument("GfmScenario: mu/b/sigma_eps must have length n");
    if (!(holiday_prob >= 0.0 && holiday_prob <= 0.2))
      throw std::invalid_argument("GfmScenario: holiday_prob must be in [0, 0.2]");
    for (Eigen::Index i = 0; i < n; ++i)
      if (!(sigma_eps(i) > 0.0))
        throw std::invalid_argument("GfmScenario: sigma_eps must be positive");
    if (!factor_params.valid())
      throw std::invalid_argument("GfmScenario: invalid factor parameters");
  }
};

struct GfmOutput {
  PricePanel prices;           // reconstructed levels, S_{i,0} = 100
  ReturnPanel returns;         // holiday cells zeroed and masked
  ReturnPanel clean_returns;   // pre-holiday ground truth
  std::vector<double> factor;  // true M_t
  std::vector<double> factor_variance;
};

namespace detail {

inline std::vector<std::string> sequence_labels(Eigen::Index count) {
  std::vector<std::string> out(static_cast<std::size_t>(count));
  for (Eigen::Index k = 0; k < count; ++k) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "t%06d", static_cast<int>(k));
    out[static_cast<std::size_t>(k)] = buf;
  }
  return out;
}

inline std::vector<std::string> series_labels(Eigen::Index count) {
  std::vector<std::string> out(static_cast<std::size_t>(count));
  for (Eigen::Index i = 0; i < count; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "S%02d", static_cast<int>(i));
    out[static_cast<std::size_t>(i)] = buf;
  }
  return out;
}

}  // namespace detail

inline GfmOutput generate(const GfmScenario& scenario) {
  scenario.validate();
  const Eigen::Index n = scenario.n;
  const Eigen::Index t = scenario.t;

  const GjrSimulation factor =
      simulate_gjr(scenario.factor_params, static_cast<std::size_t>(t), scenario.seed);
  Rng rng(scenario.seed + 0x9e3779b97f4a7c15ULL);  // residual/holiday stream

  GfmOutput out;
  out.factor = factor.series;
  out.factor_variance = factor.variance;

  const auto names = detail::series_labels(n);
  const auto stamps = detail::sequence_labels(t + 1);

  out.clean_returns.names = names;
  out.clean_returns.timestamps.assign(stamps.begin() + 1, stamps.end());
  out.clean_returns.values.resize(n, t);
  out.clean_returns.zero_mask = MaskArray::Constant(n, t, false);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < t; ++k)
      out.clean_returns.values(i, k) = scenario.mu(i) +
                                       scenario.b(i) * factor.series[static_cast<std::size_t>(k)] +
                                       scenario.sigma_eps(i) * rng.normal();

  out.returns = out.clean_returns;
  if (scenario.holiday_prob > 0.0) {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index k = 0; k < t; ++k)
        if (rng.uniform() < scenario.holiday_prob) {
          out.returns.values(i, k) = 0.0;
          out.returns.zero_mask(i, k) = true;
        }
  }

  // Prices integrate the masked returns, so a holiday shows an unchanged
  // level and to_returns() on the price panel reproduces the masked panel.
  out.prices.names = names;
  out.prices.timestamps = stamps;
  out.prices.values.resize(n, t + 1);
  out.prices.missing = MaskArray::Constant(n, t + 1, false);
  for (Eigen::Index i = 0; i < n; ++i) {
    double log_level = std::log(100.0);
    out.prices.values(i, 0) = 100.0;
    for (Eigen::Index k = 0; k < t; ++k) {
      log_level += out.returns.values(i, k);
      out.prices.values(i, k + 1) = std::exp(log_level);
    }
  }
  return out;
}

/// Panel of n i.i.d. standard-normal series of length t, all cells unmasked.
/// The reference panel for Wishart-band and noise-floor baselines.
inline ReturnPanel noise_panel(Eigen::Index n, Eigen::Index t, std::uint64_t seed) {
  if (n < 2 || t <= n) throw std::invalid_argument("noise_panel: need t > n >= 2");
  ReturnPanel panel;
  panel.names = detail::series_labels(n);
  panel.timestamps = detail::sequence_labels(t);
  panel.values.resize(n, t);
  panel.zero_mask = MaskArray::Constant(n, t, false);
  Rng rng(seed);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < t; ++k) panel.values(i, k) = rng.normal();
  return panel;
}

}  // namespace tlrmt
