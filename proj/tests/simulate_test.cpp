#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "oracle_helpers.hpp"
#include "tlrmt/panel.hpp"
#include "tlrmt/simulate.hpp"
#include "tlrmt/stats.hpp"
#include "tlrmt/xcorr.hpp"

using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

const tlrmt::GjrGarchParams kTable1{0.2486, 0.0170, 0.8790, 0.1591};

tlrmt::GfmScenario make_scenario(Eigen::Index n, Eigen::Index t, std::uint64_t seed) {
  tlrmt::GfmScenario s;
  s.n = n;
  s.t = t;
  s.mu = Eigen::VectorXd::Zero(n);
  s.b = Eigen::VectorXd::Constant(n, 0.7);
  s.sigma_eps = Eigen::VectorXd::Constant(n, 1.0);
  s.factor_params = kTable1;
  s.seed = seed;
  return s;
}

std::vector<double> row_of(const tlrmt::ReturnPanel& p, Eigen::Index i) {
  std::vector<double> v(static_cast<std::size_t>(p.length()));
  for (Eigen::Index k = 0; k < p.length(); ++k) v[static_cast<std::size_t>(k)] = p.values(i, k);
  return v;
}

// Lagged sample covariance difference d_t = a_t b_{t+lag} - scale * m_t m'_{t+lag}
// on centered inputs; returns (mean difference, Newey-West SE of the mean).
struct CovCheck {
  double diff;
  double se;
};

CovCheck lagged_cov_vs_factor(std::span<const double> a, std::span<const double> b,
                              std::span<const double> m_left, std::span<const double> m_right,
                              double scale, int lag) {
  const std::size_t len = a.size() - static_cast<std::size_t>(lag);
  std::vector<double> d(len);
  for (std::size_t t = 0; t < len; ++t)
    d[t] = a[t] * b[t + static_cast<std::size_t>(lag)] -
           scale * m_left[t] * m_right[t + static_cast<std::size_t>(lag)];
  return {tlrmt::mean(d), oracle::newey_west_se(d, 200)};
}

}  // namespace

TEST_CASE("generate: zero loadings give uncorrelated series") {
  auto scenario = make_scenario(8, 4000, 101);
  scenario.b.setZero();
  const auto out = tlrmt::generate(scenario);
  const auto c = tlrmt::corr_matrix(out.returns, 0, tlrmt::CorrEstimator::Plain);
  const double band = 3.0 / std::sqrt(static_cast<double>(scenario.t));
  for (Eigen::Index i = 0; i < 8; ++i)
    for (Eigen::Index j = i + 1; j < 8; ++j) CHECK(std::abs(c.values(i, j)) < band);
}

TEST_CASE("generate: covariances follow the single-factor identities") {
  auto scenario = make_scenario(6, 30000, 103);
  scenario.b << 1.2, 0.9, 0.6, 1.0, 0.4, 0.8;
  scenario.mu << 0.01, -0.02, 0.0, 0.005, 0.03, -0.01;
  const auto out = tlrmt::generate(scenario);

  // Center everything once.
  std::vector<std::vector<double>> r(6);
  for (Eigen::Index i = 0; i < 6; ++i) {
    r[static_cast<std::size_t>(i)] = row_of(out.clean_returns, i);
    const double m = tlrmt::mean(r[static_cast<std::size_t>(i)]);
    for (double& v : r[static_cast<std::size_t>(i)]) v -= m;
  }
  std::vector<double> m_centered = out.factor;
  const double m_mean = tlrmt::mean(m_centered);
  for (double& v : m_centered) v -= m_mean;

  SECTION("sample means stay near the drifts") {
    for (Eigen::Index i = 0; i < 6; ++i) {
      const auto row = row_of(out.clean_returns, i);
      const double sd = tlrmt::stddev(row);
      CHECK_THAT(tlrmt::mean(row),
                 WithinAbs(scenario.mu(i), 3.0 * sd / std::sqrt(static_cast<double>(scenario.t))));
    }
  }

  SECTION("contemporaneous and lagged return covariance, Eq.-style") {
    for (const auto& [i, j] : std::vector<std::pair<int, int>>{{0, 1}, {2, 3}, {1, 4}}) {
      for (int lag : {0, 1, 5}) {
        const auto check = lagged_cov_vs_factor(r[static_cast<std::size_t>(i)],
                                                r[static_cast<std::size_t>(j)], m_centered,
                                                m_centered, scenario.b(i) * scenario.b(j), lag);
        CHECK(std::abs(check.diff) <= 3.0 * check.se);
      }
    }
  }

  SECTION("squared-magnitude covariance tracks the squared factor") {
    std::vector<double> m2(m_centered.size());
    for (std::size_t t = 0; t < m2.size(); ++t) m2[t] = m_centered[t] * m_centered[t];
    for (const auto& [i, j] : std::vector<std::pair<int, int>>{{0, 1}, {3, 5}}) {
      std::vector<double> ri2(r[static_cast<std::size_t>(i)].size()),
          rj2(r[static_cast<std::size_t>(j)].size());
      for (std::size_t t = 0; t < ri2.size(); ++t) {
        ri2[t] = r[static_cast<std::size_t>(i)][t] * r[static_cast<std::size_t>(i)][t];
        rj2[t] = r[static_cast<std::size_t>(j)][t] * r[static_cast<std::size_t>(j)][t];
      }
      const double scale = scenario.b(i) * scenario.b(i) * scenario.b(j) * scenario.b(j);
      for (int lag : {0, 5}) {
        const std::size_t len = ri2.size() - static_cast<std::size_t>(lag);
        // Cov difference: subtract the mean products that the raw product
        // series carry (r^2 and M^2 have non-zero means).
        std::vector<double> d(len);
        for (std::size_t t = 0; t < len; ++t)
          d[t] = ri2[t] * rj2[t + static_cast<std::size_t>(lag)] -
                 scale * m2[t] * m2[t + static_cast<std::size_t>(lag)];
        const double mean_correction =
            tlrmt::mean(ri2) * tlrmt::mean(rj2) - scale * tlrmt::mean(m2) * tlrmt::mean(m2);
        const double diff = tlrmt::mean(d) - mean_correction;
        const double se = oracle::newey_west_se(d, 200);
        CHECK(std::abs(diff) <= 3.0 * se);
      }
    }
  }
}

TEST_CASE("generate: holidays zero out cells and stay consistent with prices") {
  auto scenario = make_scenario(10, 3000, 107);
  scenario.holiday_prob = 0.05;
  const auto out = tlrmt::generate(scenario);

  const double masked_fraction =
      static_cast<double>(out.returns.zero_mask.cast<int>().sum()) /
      static_cast<double>(scenario.n * scenario.t);
  CHECK_THAT(masked_fraction, WithinAbs(0.05, 0.01));
  for (Eigen::Index i = 0; i < scenario.n; ++i)
    for (Eigen::Index k = 0; k < scenario.t; ++k)
      if (out.returns.zero_mask(i, k)) CHECK(out.returns.values(i, k) == 0.0);

  // Prices integrate the masked returns, so ingesting them reproduces the
  // masked panel exactly (holiday cells come back as exact-zero returns).
  const auto rederived = tlrmt::to_returns(out.prices);
  CHECK((rederived.values - out.returns.values).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((rederived.zero_mask == out.returns.zero_mask).all());
}

TEST_CASE("generate is deterministic and seed-sensitive") {
  const auto a = tlrmt::generate(make_scenario(5, 500, 109));
  const auto b = tlrmt::generate(make_scenario(5, 500, 109));
  const auto c = tlrmt::generate(make_scenario(5, 500, 110));
  CHECK(a.returns.values == b.returns.values);
  CHECK(a.factor == b.factor);
  CHECK(a.returns.values != c.returns.values);
}

TEST_CASE("generate validates the scenario") {
  auto scenario = make_scenario(5, 500, 1);
  scenario.holiday_prob = 0.5;
  CHECK_THROWS_WITH(tlrmt::generate(scenario), ContainsSubstring("holiday_prob"));
  scenario.holiday_prob = 0.0;
  scenario.sigma_eps(2) = 0.0;
  CHECK_THROWS_WITH(tlrmt::generate(scenario), ContainsSubstring("sigma_eps"));
  scenario.sigma_eps(2) = 1.0;
  scenario.factor_params = {0.1, 0.3, 0.8, 0.0};
  CHECK_THROWS_WITH(tlrmt::generate(scenario), ContainsSubstring("factor"));
}

TEST_CASE("noise_panel reference statistics") {
  SECTION("deterministic under the seed") {
    const auto a = tlrmt::noise_panel(6, 300, 11);
    const auto b = tlrmt::noise_panel(6, 300, 11);
    CHECK(a.values == b.values);
    CHECK((!a.zero_mask).all());
  }
  SECTION("off-diagonal std sits near 1/sqrt(T)") {
    const Eigen::Index n = 48, t = 2744;
    double total = 0.0;
    int count = 0;
    for (int rep = 0; rep < 5; ++rep) {
      const auto panel = tlrmt::noise_panel(n, t, 200 + static_cast<std::uint64_t>(rep));
      const auto c = tlrmt::corr_matrix(panel, 0, tlrmt::CorrEstimator::Plain);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
          total += c.values(i, j) * c.values(i, j);
          ++count;
        }
    }
    const double measured = std::sqrt(total / count);
    CHECK(std::abs(measured - 1.0 / std::sqrt(2744.0)) < 0.1 / std::sqrt(2744.0));
  }
  SECTION("rejects t <= n") {
    CHECK_THROWS_WITH(tlrmt::noise_panel(10, 10, 1), ContainsSubstring("t > n"));
  }
}

TEST_CASE("overlap correction beats zeros-left-in plain estimates under holidays") {
  int wins = 0;
  const int reps = 5;
  for (int rep = 0; rep < reps; ++rep) {
    auto scenario = make_scenario(10, 2000, 300 + static_cast<std::uint64_t>(rep));
    scenario.holiday_prob = 0.05;
    const auto out = tlrmt::generate(scenario);
    const auto truth = tlrmt::corr_matrix(out.clean_returns, 0, tlrmt::CorrEstimator::Plain);
    const auto plain = tlrmt::corr_matrix(out.returns, 0, tlrmt::CorrEstimator::Plain);
    const auto overlap = tlrmt::corr_matrix(out.returns, 0, tlrmt::CorrEstimator::OverlapCorrected);
    double mae_plain = 0.0, mae_overlap = 0.0;
    int pairs = 0;
    for (Eigen::Index i = 0; i < 10; ++i)
      for (Eigen::Index j = i + 1; j < 10; ++j) {
        mae_plain += std::abs(plain.values(i, j) - truth.values(i, j));
        mae_overlap += std::abs(overlap.values(i, j) - truth.values(i, j));
        ++pairs;
      }
    if (mae_overlap / pairs < mae_plain / pairs) ++wins;
  }
  CHECK(wins == reps);
}
