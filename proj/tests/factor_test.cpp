#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <vector>

#include "oracle_helpers.hpp"
#include "test_support.hpp"
#include "tlrmt/factor.hpp"
#include "tlrmt/rng.hpp"
#include "tlrmt/simulate.hpp"

using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

tlrmt::GfmScenario basic_scenario(Eigen::Index n, Eigen::Index t, std::uint64_t seed) {
  tlrmt::GfmScenario s;
  s.n = n;
  s.t = t;
  s.mu = Eigen::VectorXd::Zero(n);
  s.b = Eigen::VectorXd::Constant(n, 0.8);
  s.sigma_eps = Eigen::VectorXd::Constant(n, 1.0);
  s.factor_params = {0.2486, 0.0170, 0.8790, 0.1591};
  s.seed = seed;
  return s;
}

double angle_degrees(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double cosine = std::abs(a.dot(b)) / (a.norm() * b.norm());
  return std::acos(std::min(cosine, 1.0)) * 180.0 / 3.14159265358979323846;
}

}  // namespace

TEST_CASE("standardize") {
  SECTION("hand-computed row") {
    const auto panel = testsupport::make_return_panel({{1, 2, 3}, {4, 0.5, 1}});
    const auto z = tlrmt::standardize(panel);
    CHECK_THAT(z.z(0, 0), WithinAbs(-1.224744871391589, 1e-12));
    CHECK_THAT(z.z(0, 1), WithinAbs(0.0, 1e-12));
    CHECK_THAT(z.z(0, 2), WithinAbs(1.224744871391589, 1e-12));
    CHECK_THAT(z.row_means(0), WithinAbs(2.0, 1e-15));
    CHECK_THAT(z.row_sigmas(0), WithinAbs(std::sqrt(2.0 / 3.0), 1e-15));
  }
  SECTION("idempotence on an already standardized row") {
    tlrmt::Rng rng(3);
    std::vector<double> row(40);
    for (auto& v : row) v = rng.normal();
    const double m = tlrmt::mean(row);
    const double s = std::sqrt(tlrmt::variance(row));
    for (auto& v : row) v = (v - m) / s;
    const auto panel = testsupport::make_return_panel({row, row});
    const auto z = tlrmt::standardize(panel);
    for (std::size_t k = 0; k < row.size(); ++k)
      CHECK_THAT(z.z(0, static_cast<Eigen::Index>(k)), WithinAbs(row[k], 1e-12));
  }
  SECTION("constant row is rejected by name") {
    const auto panel = testsupport::make_return_panel({{1, 1, 1}, {1, 2, 3}});
    CHECK_THROWS_WITH(tlrmt::standardize(panel),
                      ContainsSubstring("zero variance") && ContainsSubstring("S0"));
  }
  SECTION("invariants hold over unmasked cells with masking present") {
    tlrmt::Rng rng(5);
    std::vector<std::vector<double>> rows(3, std::vector<double>(200));
    std::vector<std::vector<bool>> masks(3, std::vector<bool>(200, false));
    for (auto& row : rows)
      for (auto& v : row) v = 0.5 + 2.0 * rng.normal();
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t k = 0; k < 200; ++k) masks[i][k] = rng.uniform() < 0.1;
    const auto z = tlrmt::standardize(testsupport::make_return_panel(rows, masks));
    for (Eigen::Index i = 0; i < 3; ++i) {
      double sum = 0, sum2 = 0;
      Eigen::Index count = 0;
      for (Eigen::Index k = 0; k < 200; ++k)
        if (!z.mask(i, k)) {
          sum += z.z(i, k);
          sum2 += z.z(i, k) * z.z(i, k);
          ++count;
        }
      const double m = sum / static_cast<double>(count);
      CHECK_THAT(m, WithinAbs(0.0, 1e-10));
      CHECK_THAT(std::sqrt(sum2 / static_cast<double>(count) - m * m), WithinAbs(1.0, 1e-10));
    }
  }
}

TEST_CASE("decompose on a rank-one panel") {
  tlrmt::Rng rng(7);
  std::vector<double> row(60);
  for (auto& v : row) v = rng.normal();
  const auto panel = testsupport::make_return_panel({row, row});
  const auto d = tlrmt::decompose(tlrmt::standardize(panel));
  CHECK_THAT(d.eigenvalues(0), WithinAbs(2.0, 1e-10));
  CHECK_THAT(d.eigenvalues(1), WithinAbs(0.0, 1e-10));
  const auto shares = tlrmt::variance_shares(d);
  CHECK_THAT(shares.share_total, WithinAbs(1.0, 1e-10));
}

TEST_CASE("decompose invariants on random panels") {
  tlrmt::Rng seed_rng(11);
  for (int trial = 0; trial < 4; ++trial) {
    const Eigen::Index n = 5 + trial * 3;
    const Eigen::Index t = 400 + trial * 200;
    const auto panel = tlrmt::noise_panel(n, t, 1000 + static_cast<std::uint64_t>(trial));
    const auto z = tlrmt::standardize(panel);
    const auto d = tlrmt::decompose(z);

    // Trace identity.
    CHECK_THAT(d.eigenvalues.sum(), WithinAbs(static_cast<double>(n), 1e-8));
    // Orthonormality.
    CHECK((d.eigenvectors.transpose() * d.eigenvectors - Eigen::MatrixXd::Identity(n, n))
              .cwiseAbs()
              .maxCoeff() < 1e-8);
    // PC variance equals the eigenvalue; PCs are mutually uncorrelated.
    for (Eigen::Index k = 0; k < n; ++k) {
      const double var = d.pcs.row(k).squaredNorm() / static_cast<double>(t);
      if (d.eigenvalues(k) > 1e-12) CHECK_THAT(var, WithinRel(d.eigenvalues(k), 1e-6));
    }
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = a + 1; b < n; ++b) {
        const double cov = d.pcs.row(a).dot(d.pcs.row(b)) / static_cast<double>(t);
        CHECK_THAT(cov, WithinAbs(0.0, 1e-6));
      }
    // Reconstruction z = U alpha.
    CHECK((z.z - d.eigenvectors * d.pcs).cwiseAbs().maxCoeff() < 1e-8);
    // Total variance identity.
    double var_z = 0, var_pc = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
      var_z += z.z.row(k).squaredNorm() / static_cast<double>(t);
      var_pc += d.pcs.row(k).squaredNorm() / static_cast<double>(t);
    }
    CHECK_THAT(var_z, WithinRel(var_pc, 1e-6));
    // Sign convention: positive column sums.
    for (Eigen::Index k = 0; k < n; ++k) CHECK(d.eigenvectors.col(k).sum() >= 0.0);
  }
}

TEST_CASE("decompose recovers the factor direction on GFM data") {
  auto scenario = basic_scenario(8, 5000, 13);
  scenario.b << 1.2, 0.9, 0.7, 1.0, 0.5, 0.8, 1.1, 0.6;
  const auto output = tlrmt::generate(scenario);
  const auto d = tlrmt::decompose(tlrmt::standardize(output.returns));

  const double var_m = tlrmt::variance(output.factor);
  Eigen::VectorXd truth(8);
  for (Eigen::Index i = 0; i < 8; ++i) {
    const double b = scenario.b(i);
    truth(i) = b * std::sqrt(var_m) /
               std::sqrt(b * b * var_m + scenario.sigma_eps(i) * scenario.sigma_eps(i));
  }
  CHECK(angle_degrees(d.eigenvectors.col(0), truth) < 5.0);
}

TEST_CASE("noise panels rarely show significant eigenvalues") {
  int clean = 0;
  const int reps = 20;
  for (int r = 0; r < reps; ++r) {
    const auto panel = tlrmt::noise_panel(48, 2744, 4000 + static_cast<std::uint64_t>(r));
    const auto d = tlrmt::decompose(tlrmt::standardize(panel));
    if (d.n_significant == 0) ++clean;
  }
  CHECK(clean >= static_cast<int>(0.95 * reps) - 1);
}

TEST_CASE("variance_shares reproduces the reference arithmetic") {
  SECTION("three significant eigenvalues out of trace 48") {
    std::vector<double> ev{14.762, 3.453, 1.380};
    const double rest = (48.0 - std::accumulate(ev.begin(), ev.end(), 0.0)) / 45.0;
    for (int k = 0; k < 45; ++k) ev.push_back(rest);
    const auto shares = tlrmt::variance_shares(ev, 3);
    CHECK_THAT(shares.share_total * 100.0, WithinAbs(30.754166666666666, 0.01));
    REQUIRE(shares.share_significant.has_value());
    CHECK_THAT(*shares.share_significant * 100.0, WithinAbs(75.335544781832112, 0.01));
  }
  SECTION("share_significant is absent when nothing is significant") {
    const std::vector<double> ev{1.1, 1.0, 0.9};
    const auto shares = tlrmt::variance_shares(ev, 0);
    CHECK_FALSE(shares.share_significant.has_value());
  }
  SECTION("share_total tracks the b-implied value on simulated data") {
    auto scenario = basic_scenario(16, 20000, 17);
    const auto output = tlrmt::generate(scenario);
    const auto d = tlrmt::decompose(tlrmt::standardize(output.returns));
    const double var_m = tlrmt::variance(output.factor);
    // Uniform loadings: every series has the same factor correlation c, so
    // lambda_1 = (1 - c^2) + N c^2 exactly for the population matrix.
    const double b = scenario.b(0);
    const double c2 = b * b * var_m / (b * b * var_m + 1.0);
    const double implied_share = ((1.0 - c2) + 16.0 * c2) / 16.0;
    const auto shares = tlrmt::variance_shares(d);
    CHECK_THAT(shares.share_total, WithinAbs(implied_share, 0.03));
  }
}

TEST_CASE("factor_index_corr") {
  SECTION("identical rows give correlation 1") {
    tlrmt::Rng rng(19);
    std::vector<double> row(80);
    for (auto& v : row) v = rng.normal();
    const auto panel = testsupport::make_return_panel({row, row, row});
    const auto d = tlrmt::decompose(tlrmt::standardize(panel));
    for (double corr : tlrmt::factor_index_corr(d)) CHECK_THAT(corr, WithinAbs(1.0, 1e-9));
  }
  SECTION("matches the direct Pearson correlation oracle") {
    auto scenario = basic_scenario(10, 10000, 23);
    scenario.b << 1.2, 0.9, 0.0, 1.0, 0.8, 0.9, 1.1, 0.8, 1.0, 0.0;
    const auto output = tlrmt::generate(scenario);
    const auto d = tlrmt::decompose(tlrmt::standardize(output.returns));
    const auto corr = tlrmt::factor_index_corr(d);
    const Eigen::VectorXd m = d.global_factor();
    const std::vector<double> m_vec(m.data(), m.data() + m.size());
    for (Eigen::Index i = 0; i < 10; ++i) {
      std::vector<double> r_vec(static_cast<std::size_t>(output.returns.length()));
      for (Eigen::Index k = 0; k < output.returns.length(); ++k)
        r_vec[static_cast<std::size_t>(k)] = output.returns.values(i, k);
      const double direct = oracle::plain_corr(m_vec, r_vec, 0);
      CHECK_THAT(corr[static_cast<std::size_t>(i)], WithinAbs(direct, 1e-6));
    }
    // Zero-loading series correlate within sampling noise of 0.
    const double band = 2.0 / std::sqrt(static_cast<double>(scenario.t));
    CHECK(std::abs(corr[2]) < band);
    CHECK(std::abs(corr[9]) < band);
  }
}

TEST_CASE("screen_uncorrelated") {
  const std::vector<std::string> names{"a", "b", "c"};
  SECTION("direct filter, sorted ascending by |corr|") {
    const auto picked = tlrmt::screen_uncorrelated(names, {0.09, 0.5, 0.05}, 0.1);
    REQUIRE(picked.size() == 2);
    CHECK(picked[0] == "c");
    CHECK(picked[1] == "a");
  }
  SECTION("no index below the threshold") {
    CHECK(tlrmt::screen_uncorrelated(names, {0.3, 0.5, 0.4}, 0.1).empty());
  }
  SECTION("threshold validation") {
    CHECK_THROWS_WITH(tlrmt::screen_uncorrelated(names, {0.1, 0.2, 0.3}, 1.5),
                      ContainsSubstring("threshold"));
  }
}

TEST_CASE("acf and Ljung-Box") {
  SECTION("acf(0) is exactly 1 and the CI uses 1.96/sqrt(T)") {
    tlrmt::Rng rng(29);
    std::vector<double> x(1000);
    for (auto& v : x) v = rng.normal();
    const auto rep = tlrmt::acf(x, 10);
    CHECK(rep.acf[0] == 1.0);
    CHECK_THAT(rep.ci_halfwidth, WithinAbs(1.96 / std::sqrt(1000.0), 1e-12));
  }
  SECTION("white noise stays inside the band at most lags") {
    tlrmt::Rng rng(31);
    std::vector<double> x(2744);
    for (auto& v : x) v = rng.normal();
    const auto rep = tlrmt::acf(x, 100);
    int outside = 0;
    for (int k = 1; k <= 100; ++k)
      if (std::abs(rep.acf[static_cast<std::size_t>(k)]) > rep.ci_halfwidth) ++outside;
    CHECK(outside <= 10);
    CHECK(rep.ljung_box_pvalue > 0.01);
  }
  SECTION("AR(1) autocorrelation is recovered") {
    tlrmt::Rng rng(37);
    std::vector<double> x(10000);
    x[0] = rng.normal();
    for (std::size_t k = 1; k < x.size(); ++k) x[k] = 0.5 * x[k - 1] + rng.normal();
    const auto rep = tlrmt::acf(x, 10);
    CHECK_THAT(rep.acf[1], WithinAbs(0.5, 0.05));
    CHECK(rep.ljung_box_pvalue < 1e-6);
  }
  SECTION("rejects constant series and oversized lags") {
    const std::vector<double> flat(100, 1.0);
    CHECK_THROWS_WITH(tlrmt::acf(flat, 5), ContainsSubstring("constant"));
    std::vector<double> x(100);
    tlrmt::Rng rng(41);
    for (auto& v : x) v = rng.normal();
    CHECK_THROWS_WITH(tlrmt::acf(x, 30), ContainsSubstring("T/4"));
  }
}

TEST_CASE("residual_spectrum") {
  SECTION("removing a dominant factor collapses lambda(0)") {
    auto scenario = basic_scenario(16, 4000, 43);
    scenario.b = Eigen::VectorXd::Constant(16, 1.5);
    const auto output = tlrmt::generate(scenario);
    const auto d = tlrmt::decompose(tlrmt::standardize(output.returns));
    const auto original = tlrmt::lambda_curve(output.returns, {0});
    const auto residual = tlrmt::residual_spectrum(d, {0});
    CHECK(residual.at(0) < 0.25 * original.at(0));
  }
  SECTION("with nothing to remove the curves agree within noise") {
    auto scenario = basic_scenario(16, 4000, 47);
    scenario.b = Eigen::VectorXd::Zero(16);
    const auto output = tlrmt::generate(scenario);
    const auto d = tlrmt::decompose(tlrmt::standardize(output.returns));
    const auto original = tlrmt::lambda_curve(output.returns, {0, 1, 5});
    const auto residual = tlrmt::residual_spectrum(d, {0, 1, 5});
    // At lag 0 the decomposition still strips the top *sample* PC of the
    // noise and re-standardizes the rows, which shifts the edge by O(l1/N);
    // allow that, and require close agreement at the lagged floor.
    CHECK(residual.at(0) / original.at(0) > 0.85);
    CHECK(residual.at(0) / original.at(0) < 1.15);
    for (int lag : {1, 5}) CHECK_THAT(residual.at(lag), WithinAbs(original.at(lag), 0.06));
  }
  SECTION("i.i.d. residuals sit at the noise floor for lag >= 1") {
    auto scenario = basic_scenario(16, 4000, 53);
    scenario.b = Eigen::VectorXd::Constant(16, 1.0);
    const auto output = tlrmt::generate(scenario);
    const auto d = tlrmt::decompose(tlrmt::standardize(output.returns));
    const auto residual = tlrmt::residual_spectrum(d, {1, 3, 5});
    const double floor = 1.0 + 2.0 * std::sqrt(16.0 / 4000.0);
    for (double v : residual.lambda_max) CHECK_THAT(v, WithinAbs(floor, 0.08));
  }
}

TEST_CASE("sign convention invariance of derived quantities") {
  auto scenario = basic_scenario(6, 2000, 59);
  scenario.b << 0.9, 0.7, 1.1, 0.4, 0.8, 0.05;
  const auto output = tlrmt::generate(scenario);
  const auto d = tlrmt::decompose(tlrmt::standardize(output.returns));

  // Flip M and u_1 together and recompute everything downstream.
  Eigen::VectorXd u1 = -d.eigenvectors.col(0);
  Eigen::VectorXd m = -d.global_factor();
  Eigen::VectorXd loadings = d.row_sigmas.cwiseProduct(u1);
  const double root = std::sqrt(d.eigenvalues(0));
  for (Eigen::Index i = 0; i < 6; ++i) {
    for (Eigen::Index j = 0; j < 6; ++j)
      CHECK_THAT(loadings(i) * loadings(j), WithinAbs(d.loadings(i) * d.loadings(j), 1e-12));
    CHECK_THAT(std::abs(root * u1(i)),
               WithinAbs(std::abs(tlrmt::factor_index_corr(d)[static_cast<std::size_t>(i)]), 1e-12));
  }
  // Shares depend only on eigenvalues; the screen depends only on |corr|.
  std::vector<double> flipped_corr(6);
  for (Eigen::Index i = 0; i < 6; ++i) flipped_corr[static_cast<std::size_t>(i)] = root * u1(i);
  CHECK(tlrmt::screen_uncorrelated(d.names, flipped_corr, 0.3) ==
        tlrmt::screen_uncorrelated(d.names, tlrmt::factor_index_corr(d), 0.3));
}
