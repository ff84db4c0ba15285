#pragma once

#include <Eigen/Core>
#include <Eigen/LU>

#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tlrmt/optim.hpp"
#include "tlrmt/rng.hpp"
#include "tlrmt/stats.hpp"

namespace tlrmt {

/// GJR-GARCH(1,1): sigma^2_t = alpha0 + (alpha1 + gamma * 1[eps_{t-1} < 0]) *
/// eps^2_{t-1} + beta1 * sigma^2_{t-1}. The indicator follows the standard
/// convention: it refers to the sign of the lagged innovation it multiplies.
struct GjrGarchParams {
  double alpha0 = 0.0;
  double alpha1 = 0.0;
  double beta1 = 0.0;
  double gamma = 0.0;

  /// alpha1 + beta1 + gamma/2; must stay below 1 for a finite long-run variance.
  double persistence() const { return alpha1 + beta1 + 0.5 * gamma; }

  bool valid() const {
    return alpha0 > 0.0 && alpha1 >= 0.0 && beta1 >= 0.0 && gamma >= 0.0 && persistence() < 1.0;
  }
};

/// Long-run variance alpha0 / (1 - alpha1 - beta1 - gamma/2).
inline double unconditional_variance(const GjrGarchParams& p) {
  if (!(p.alpha0 > 0.0) || p.alpha1 < 0.0 || p.beta1 < 0.0 || p.gamma < 0.0)
    throw std::invalid_argument("unconditional_variance: coefficients out of range");
  if (p.persistence() >= 1.0)
    throw std::invalid_argument("unconditional_variance: persistence " +
                                std::to_string(p.persistence()) + " >= 1");
  return p.alpha0 / (1.0 - p.persistence());
}

/// One step of the variance recursion.
inline double gjr_next_variance(const GjrGarchParams& p, double eps_prev, double sigma2_prev) {
  return p.alpha0 + (p.alpha1 + (eps_prev < 0.0 ? p.gamma : 0.0)) * eps_prev * eps_prev +
         p.beta1 * sigma2_prev;
}

struct GjrSimulation {
  std::vector<double> series;    // M_t
  std::vector<double> variance;  // true sigma^2_t
};

/// Simulates M_t = sigma_t * eta_t with Gaussian eta and sigma^2_1 set to the
/// unconditional variance. Deterministic for a fixed seed.
inline GjrSimulation simulate_gjr(const GjrGarchParams& p, std::size_t t, std::uint64_t seed) {
  if (!p.valid()) throw std::invalid_argument("simulate_gjr: non-stationary or invalid parameters");
  if (t < 100) throw std::invalid_argument("simulate_gjr: t >= 100 required");
  GjrSimulation sim;
  sim.series.resize(t);
  sim.variance.resize(t);
  Rng rng(seed);
  sim.variance[0] = unconditional_variance(p);
  sim.series[0] = std::sqrt(sim.variance[0]) * rng.normal();
  for (std::size_t k = 1; k < t; ++k) {
    sim.variance[k] = gjr_next_variance(p, sim.series[k - 1], sim.variance[k - 1]);
    sim.series[k] = std::sqrt(sim.variance[k]) * rng.normal();
  }
  return sim;
}

/// Conditional variance path with sigma^2_1 = sigma2_init.
inline std::vector<double> gjr_variance_path(const GjrGarchParams& p, std::span<const double> series,
                                             double sigma2_init) {
  std::vector<double> s2(series.size());
  if (series.empty()) return s2;
  s2[0] = sigma2_init;
  for (std::size_t k = 1; k < series.size(); ++k)
    s2[k] = gjr_next_variance(p, series[k - 1], s2[k - 1]);
  return s2;
}

/// Gaussian log-likelihood -1/2 sum[ln(2 pi sigma^2_t) + x_t^2 / sigma^2_t]
/// with sigma^2_1 = population variance of the series. The series is assumed
/// mean-removed by the caller.
inline double gjr_loglik(const GjrGarchParams& p, std::span<const double> series) {
  if (series.size() < 2) throw std::invalid_argument("gjr_loglik: series too short");
  double m2 = 0.0;
  for (double v : series) m2 += v * v;
  m2 /= static_cast<double>(series.size());
  constexpr double kLog2Pi = 1.8378770664093454836;
  double sigma2 = m2;
  double ll = 0.0;
  for (std::size_t k = 0; k < series.size(); ++k) {
    if (k > 0) sigma2 = gjr_next_variance(p, series[k - 1], sigma2);
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
      return -std::numeric_limits<double>::infinity();
    ll += kLog2Pi + std::log(sigma2) + series[k] * series[k] / sigma2;
  }
  return -0.5 * ll;
}

/// Moment-matched starting point used by fit_gjr.
inline GjrGarchParams gjr_fit_start(std::span<const double> series) {
  double m2 = 0.0;
  for (double v : series) m2 += v * v;
  m2 /= static_cast<double>(series.size());
  GjrGarchParams p;
  p.alpha1 = 0.05;
  p.beta1 = 0.85;
  p.gamma = 0.08;
  p.alpha0 = m2 * (1.0 - p.persistence());
  return p;
}

struct GjrGarchFit {
  GjrGarchParams params;
  std::vector<double> cond_variance;  // sigma^2_t at the optimum
  std::vector<double> innovations;    // eta_t = M_t / sigma_t
  double loglik = 0.0;
  std::array<double, 4> std_errors{};  // order: alpha0, alpha1, beta1, gamma
  std::array<double, 4> t_values{};
  std::array<double, 4> p_values{};
  double last_value = 0.0;  // M_T, kept for forecasting
  int iterations = 0;
};

namespace detail {

// Unconstrained parameterization: theta = (ln alpha0, logit u, logit v,
// logit w) with u = persistence, v = beta share of u, w = gamma share of the
// remainder. Every theta maps to a valid stationary parameter set.
inline GjrGarchParams gjr_from_theta(const std::vector<double>& theta) {
  const auto sigmoid = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  const double u = sigmoid(theta[1]);
  const double v = sigmoid(theta[2]);
  const double w = sigmoid(theta[3]);
  GjrGarchParams p;
  p.alpha0 = std::exp(theta[0]);
  p.beta1 = u * v;
  p.gamma = 2.0 * u * (1.0 - v) * w;
  p.alpha1 = u * (1.0 - v) * (1.0 - w);
  return p;
}

inline std::vector<double> gjr_to_theta(const GjrGarchParams& p) {
  const auto logit = [](double x) {
    const double c = std::clamp(x, 1e-12, 1.0 - 1e-12);
    return std::log(c / (1.0 - c));
  };
  const double u = p.persistence();
  const double v = p.beta1 / u;
  const double rest = u * (1.0 - v);
  const double w = rest > 0.0 ? (0.5 * p.gamma) / rest : 0.5;
  return {std::log(p.alpha0), logit(u), logit(v), logit(w)};
}

// Numerical Hessian of the negative log-likelihood in original parameter
// space (observed information matrix).
inline Eigen::Matrix4d gjr_observed_information(const GjrGarchParams& p,
                                                std::span<const double> series) {
  const auto nll = [&](const std::array<double, 4>& q) {
    GjrGarchParams g{q[0], q[1], q[2], q[3]};
    if (!(g.alpha0 > 0.0)) return std::numeric_limits<double>::infinity();
    return -gjr_loglik(g, series);
  };
  const std::array<double, 4> p0{p.alpha0, p.alpha1, p.beta1, p.gamma};
  std::array<double, 4> h{};
  for (int k = 0; k < 4; ++k)
    h[static_cast<std::size_t>(k)] =
        std::max(1e-4 * std::abs(p0[static_cast<std::size_t>(k)]), 1e-6);
  h[0] = std::min(h[0], 0.5 * p.alpha0);  // keep alpha0 positive

  Eigen::Matrix4d hess;
  const double f0 = nll(p0);
  for (int a = 0; a < 4; ++a) {
    for (int b = a; b < 4; ++b) {
      auto shifted = [&](double da, double db) {
        std::array<double, 4> q = p0;
        q[static_cast<std::size_t>(a)] += da;
        q[static_cast<std::size_t>(b)] += db;
        return nll(q);
      };
      const double ha = h[static_cast<std::size_t>(a)];
      const double hb = h[static_cast<std::size_t>(b)];
      double value;
      if (a == b) {
        value = (shifted(ha, 0.0) + shifted(-ha, 0.0) - 2.0 * f0) / (ha * ha);
      } else {
        value = (shifted(ha, hb) - shifted(ha, -hb) - shifted(-ha, hb) + shifted(-ha, -hb)) /
                (4.0 * ha * hb);
      }
      hess(a, b) = value;
      hess(b, a) = value;
    }
  }
  if (!hess.allFinite())
    throw std::runtime_error("fit_gjr: non-finite observed information near the optimum");
  return hess;
}

}  // namespace detail

/// Maximum-likelihood GJR-GARCH(1,1) fit of a mean-removed series. The
/// optimizer works in an unconstrained reparameterization, so positivity and
/// stationarity hold by construction; standard errors come from the inverse
/// of the numerically differentiated observed information matrix.
inline GjrGarchFit fit_gjr(std::span<const double> series) {
  if (series.size() < 500)
    throw std::invalid_argument("fit_gjr: need at least 500 observations, got " +
                                std::to_string(series.size()));
  const auto objective = [&](const std::vector<double>& theta) {
    const double ll = gjr_loglik(detail::gjr_from_theta(theta), series);
    return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
  };

  std::vector<double> theta = detail::gjr_to_theta(gjr_fit_start(series));
  GjrGarchFit fit;
  double best = std::numeric_limits<double>::infinity();
  // A restart from the incumbent with a fresh simplex guards against the
  // occasional premature simplex collapse.
  for (int round = 0; round < 2; ++round) {
    const auto res = nelder_mead(objective, theta, round == 0 ? 0.5 : 0.1, 4000, 1e-12);
    fit.iterations += res.iterations;
    if (res.fx < best) {
      best = res.fx;
      theta = res.x;
    }
  }
  if (!std::isfinite(best)) throw std::runtime_error("fit_gjr: optimizer failed to find a finite optimum");

  fit.params = detail::gjr_from_theta(theta);
  if (fit.params.persistence() > 0.9999)
    throw std::runtime_error("fit_gjr: boundary solution, persistence = " +
                             std::to_string(fit.params.persistence()));
  fit.loglik = -best;

  double m2 = 0.0;
  for (double v : series) m2 += v * v;
  m2 /= static_cast<double>(series.size());
  fit.cond_variance = gjr_variance_path(fit.params, series, m2);
  fit.innovations.resize(series.size());
  for (std::size_t k = 0; k < series.size(); ++k)
    fit.innovations[k] = series[k] / std::sqrt(fit.cond_variance[k]);
  fit.last_value = series.back();

  const Eigen::Matrix4d info = detail::gjr_observed_information(fit.params, series);
  Eigen::FullPivLU<Eigen::Matrix4d> lu(info);
  if (!lu.isInvertible())
    throw std::runtime_error("fit_gjr: observed information matrix is singular");
  const Eigen::Matrix4d cov = lu.inverse();
  const std::array<double, 4> values{fit.params.alpha0, fit.params.alpha1, fit.params.beta1,
                                     fit.params.gamma};
  for (int k = 0; k < 4; ++k) {
    const double var = cov(k, k);
    if (!(var > 0.0))
      throw std::runtime_error("fit_gjr: information matrix not positive definite at the optimum");
    const auto i = static_cast<std::size_t>(k);
    fit.std_errors[i] = std::sqrt(var);
    fit.t_values[i] = values[i] / fit.std_errors[i];
    fit.p_values[i] = normal_two_sided_p(fit.t_values[i]);
  }
  return fit;
}

/// Expected variance path for horizons 1..h. Step 1 uses the supplied state
/// (realized squared innovation, its sign indicator, and current variance);
/// steps >= 2 replace the indicator with its expectation 1/2, which is exact
/// for symmetric innovations:
///   E[sigma^2_{t+h}] = alpha0 + (alpha1 + gamma/2 + beta1) E[sigma^2_{t+h-1}].
inline std::vector<double> forecast_variance(const GjrGarchParams& p, double last_sigma2,
                                             double last_eps_sq, double indicator, int horizon) {
  if (horizon < 1) throw std::invalid_argument("forecast_variance: horizon >= 1 required");
  if (!p.valid()) throw std::invalid_argument("forecast_variance: invalid parameters");
  std::vector<double> path(static_cast<std::size_t>(horizon));
  path[0] = p.alpha0 + (p.alpha1 + p.gamma * indicator) * last_eps_sq + p.beta1 * last_sigma2;
  const double kappa = p.persistence();
  for (int h = 1; h < horizon; ++h)
    path[static_cast<std::size_t>(h)] = p.alpha0 + kappa * path[static_cast<std::size_t>(h) - 1];
  return path;
}

inline std::vector<double> forecast_variance(const GjrGarchFit& fit, int horizon) {
  return forecast_variance(fit.params, fit.cond_variance.back(),
                           fit.last_value * fit.last_value,
                           fit.last_value < 0.0 ? 1.0 : 0.0, horizon);
}

}  // namespace tlrmt
