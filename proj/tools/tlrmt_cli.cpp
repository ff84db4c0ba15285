// Command-line front end for the toolkit. Pipeline stages communicate
// through CSV/JSON files so each step can be re-run and tested on its own:
//
//   tlrmt ingest    prices.csv            -> returns.csv, magnitudes.csv
//   tlrmt spectrum  returns.csv           -> lambda_L curves + power-law fits
//   tlrmt factor    returns.csv           -> decomposition JSON, factor/residual CSVs
//   tlrmt garch     global_factor.csv     -> fit JSON, variance + forecast CSVs
//   tlrmt simulate  scenario.json         -> synthetic panel files
//   tlrmt noise-baseline                  -> noise lambda_L stats + Wishart bounds

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "tlrmt/tlrmt.hpp"

namespace {

using nlohmann::json;

struct Defaults {
  std::string lags = "0:100";
  std::string estimator = "overlap-corrected-unit-diagonal";
  std::string fit_range = "1:100";
  double screen_threshold = 0.1;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

Defaults load_defaults(const std::string& config_path) {
  Defaults d;
  if (config_path.empty()) return d;
  std::ifstream in(config_path);
  if (!in) throw std::runtime_error("cannot open config '" + config_path + "'");
  json j;
  in >> j;
  d.lags = j.value("lags", d.lags);
  d.estimator = j.value("estimator", d.estimator);
  d.fit_range = j.value("fit_range", d.fit_range);
  d.screen_threshold = j.value("screen_threshold", d.screen_threshold);
  d.seed = j.value("seed", d.seed);
  d.threads = j.value("threads", d.threads);
  return d;
}

std::vector<int> parse_lags(const std::string& spec) {
  std::vector<int> lags;
  const auto colon = spec.find(':');
  if (colon != std::string::npos) {
    const int lo = std::stoi(spec.substr(0, colon));
    const int hi = std::stoi(spec.substr(colon + 1));
    if (hi < lo) throw std::runtime_error("lag range '" + spec + "' is empty");
    for (int lag = lo; lag <= hi; ++lag) lags.push_back(lag);
    return lags;
  }
  std::size_t start = 0;
  while (start <= spec.size()) {
    const auto comma = spec.find(',', start);
    const std::string tok = spec.substr(start, comma == std::string::npos ? comma : comma - start);
    if (!tok.empty()) lags.push_back(std::stoi(tok));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (lags.empty()) throw std::runtime_error("no lags in '" + spec + "'");
  return lags;
}

std::pair<int, int> parse_range(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw std::runtime_error("range '" + spec + "' must be lo:hi");
  return {std::stoi(spec.substr(0, colon)), std::stoi(spec.substr(colon + 1))};
}

std::filesystem::path ensure_out_dir(const std::string& out) {
  std::filesystem::path dir(out);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_magnitude_panel_csv(const tlrmt::MagnitudePanel& panel, const std::string& path) {
  tlrmt::ReturnPanel as_returns;
  as_returns.names = panel.names;
  as_returns.timestamps = panel.timestamps;
  as_returns.values = panel.values;
  as_returns.zero_mask = panel.zero_mask;
  tlrmt::write_return_panel_csv(as_returns, path);
}

int run(int argc, char** argv) {
  CLI::App app{"time-lag cross-correlation, global-factor, and GJR-GARCH toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON file with default options")
      ->check(CLI::ExistingFile);

  // Options shared by several subcommands; resolved after the config load.
  struct {
    std::string input, out = "out", scenario;
    std::string lags, estimator, fit_range;
    double screen_threshold = -1.0;
    std::int64_t seed = -1;
    unsigned threads = 0;
    bool no_zero_mask = false;
    int horizon = 100;
    int n = 48, t = 2744, replicates = 100, bins = 41;
  } opt;

  auto* ingest = app.add_subcommand("ingest", "price CSV -> return/magnitude panel cache");
  ingest->add_option("--input", opt.input, "price CSV (date,<names...>)")->required();
  ingest->add_option("--out", opt.out, "output directory");
  ingest->add_flag("--no-zero-mask", opt.no_zero_mask,
                   "keep exact-zero returns as data instead of masking them");

  auto* spectrum = app.add_subcommand("spectrum", "lambda_L(lag) curves and power-law fits");
  spectrum->add_option("--input", opt.input, "return panel CSV")->required();
  spectrum->add_option("--out", opt.out, "output directory");
  spectrum->add_option("--lags", opt.lags, "lag grid, lo:hi or comma list");
  spectrum->add_option("--estimator", opt.estimator,
                       "plain | overlap-corrected | overlap-corrected-unit-diagonal");
  spectrum->add_option("--fit-range", opt.fit_range, "power-law fit range lo:hi (lo >= 1)");
  spectrum->add_option("--threads", opt.threads, "worker threads (0 = hardware)");

  auto* factor = app.add_subcommand("factor", "PCA global factor, loadings, residuals");
  factor->add_option("--input", opt.input, "return panel CSV")->required();
  factor->add_option("--out", opt.out, "output directory");
  factor->add_option("--screen-threshold", opt.screen_threshold,
                     "|corr| threshold for the uncorrelated-index screen");

  auto* garch = app.add_subcommand("garch", "GJR-GARCH(1,1) MLE fit and variance forecast");
  garch->add_option("--input", opt.input, "time series CSV (date,value); mean is removed")
      ->required();
  garch->add_option("--out", opt.out, "output directory");
  garch->add_option("--horizon", opt.horizon, "forecast horizon");

  auto* simulate = app.add_subcommand("simulate", "generate a synthetic GFM panel");
  simulate->add_option("--scenario", opt.scenario, "scenario JSON")->required();
  simulate->add_option("--out", opt.out, "output directory");
  simulate->add_option("--seed", opt.seed, "override the scenario seed");

  auto* noise = app.add_subcommand("noise-baseline", "i.i.d. noise lambda_L and Wishart stats");
  noise->add_option("--n", opt.n, "series count");
  noise->add_option("--t", opt.t, "series length");
  noise->add_option("--replicates", opt.replicates, "Monte-Carlo replicates");
  noise->add_option("--lags", opt.lags, "lag grid");
  noise->add_option("--estimator", opt.estimator, "estimator for the curves");
  noise->add_option("--seed", opt.seed, "base seed");
  noise->add_option("--out", opt.out, "output directory");
  noise->add_option("--threads", opt.threads, "worker threads");

  CLI11_PARSE(app, argc, argv);
  const Defaults defaults = load_defaults(config_path);
  if (opt.lags.empty()) opt.lags = defaults.lags;
  if (opt.estimator.empty()) opt.estimator = defaults.estimator;
  if (opt.fit_range.empty()) opt.fit_range = defaults.fit_range;
  if (opt.screen_threshold < 0.0) opt.screen_threshold = defaults.screen_threshold;
  if (opt.threads == 0) opt.threads = defaults.threads;
  const std::uint64_t seed = opt.seed >= 0 ? static_cast<std::uint64_t>(opt.seed) : defaults.seed;

  if (*ingest) {
    const auto dir = ensure_out_dir(opt.out);
    const tlrmt::PricePanel prices = tlrmt::ingest_csv(opt.input);
    const tlrmt::ReturnPanel returns = tlrmt::to_returns(prices, !opt.no_zero_mask);
    tlrmt::write_return_panel_csv(returns, (dir / "returns.csv").string());
    write_magnitude_panel_csv(tlrmt::to_magnitudes(returns), (dir / "magnitudes.csv").string());
    std::cout << "ingested " << prices.series_count() << " series x " << prices.length()
              << " rows -> " << dir.string() << "\n";
    return 0;
  }

  if (*spectrum) {
    const auto dir = ensure_out_dir(opt.out);
    const auto estimator = tlrmt::estimator_from_string(opt.estimator);
    const auto lags = parse_lags(opt.lags);
    const auto [fit_lo, fit_hi] = parse_range(opt.fit_range);
    const tlrmt::ReturnPanel returns = tlrmt::read_return_panel_csv(opt.input);
    const tlrmt::MagnitudePanel magnitudes = tlrmt::to_magnitudes(returns);

    const auto ret_curve = tlrmt::lambda_curve(returns, lags, estimator,
                                               tlrmt::SpectrumSource::Returns, false, opt.threads);
    const auto mag_curve = tlrmt::lambda_curve(magnitudes, lags, estimator,
                                               tlrmt::SpectrumSource::Magnitudes, false, opt.threads);
    tlrmt::write_curve_csv(ret_curve, (dir / "spectrum_returns.csv").string());
    tlrmt::write_curve_csv(mag_curve, (dir / "spectrum_magnitudes.csv").string());
    tlrmt::write_json(tlrmt::power_law_json(tlrmt::fit_power_law(ret_curve, fit_lo, fit_hi)),
                      (dir / "power_law_returns.json").string());
    tlrmt::write_json(tlrmt::power_law_json(tlrmt::fit_power_law(mag_curve, fit_lo, fit_hi)),
                      (dir / "power_law_magnitudes.json").string());
    std::cout << "spectrum over " << lags.size() << " lags -> " << dir.string() << "\n";
    return 0;
  }

  if (*factor) {
    const auto dir = ensure_out_dir(opt.out);
    const tlrmt::ReturnPanel returns = tlrmt::read_return_panel_csv(opt.input);
    const auto decomposition = tlrmt::decompose(tlrmt::standardize(returns));

    json j = tlrmt::factor_json(decomposition, opt.screen_threshold);
    const Eigen::VectorXd m = decomposition.global_factor();
    const std::vector<double> m_vec(m.data(), m.data() + m.size());
    const int max_lag =
        std::min<int>(100, static_cast<int>(decomposition.length()) / 4 - 1);
    if (max_lag >= 1) {
      const auto report = tlrmt::acf(m_vec, max_lag);
      std::vector<double> abs_m(m_vec.size());
      for (std::size_t k = 0; k < m_vec.size(); ++k) abs_m[k] = std::abs(m_vec[k]);
      const auto abs_report = tlrmt::acf(abs_m, max_lag);
      j["acf"] = {{"ci_halfwidth", report.ci_halfwidth},
                  {"ljung_box",
                   {{"lags", report.ljung_box_lags},
                    {"statistic", report.ljung_box_stat},
                    {"p_value", report.ljung_box_pvalue}}}};
      std::ofstream acf_csv(dir / "factor_acf.csv");
      acf_csv << "lag,acf_M,acf_abs_M\n";
      for (int k = 0; k <= max_lag; ++k)
        acf_csv << k << ',' << tlrmt::fmt12(report.acf[static_cast<std::size_t>(k)]) << ','
                << tlrmt::fmt12(abs_report.acf[static_cast<std::size_t>(k)]) << '\n';
    }
    tlrmt::write_json(j, (dir / "factor.json").string());
    tlrmt::write_series_csv("M", decomposition.timestamps, m_vec,
                            (dir / "global_factor.csv").string());
    tlrmt::write_return_panel_csv(tlrmt::residual_returns(decomposition),
                                  (dir / "residuals.csv").string());
    std::cout << "factor: " << decomposition.n_significant << " significant eigenvalue(s) -> "
              << dir.string() << "\n";
    return 0;
  }

  if (*garch) {
    const auto dir = ensure_out_dir(opt.out);
    const tlrmt::SeriesCsv series = tlrmt::read_series_csv(opt.input);
    std::vector<double> centered = series.values;
    const double m = tlrmt::mean(centered);
    for (double& v : centered) v -= m;

    const tlrmt::GjrGarchFit fit = tlrmt::fit_gjr(centered);
    tlrmt::write_json(tlrmt::garch_fit_json(fit), (dir / "garch_fit.json").string());
    tlrmt::write_series_csv("sigma2", series.timestamps, fit.cond_variance,
                            (dir / "cond_variance.csv").string());
    tlrmt::write_forecast_csv(tlrmt::forecast_variance(fit, opt.horizon),
                              (dir / "forecast.csv").string());
    std::cout << "garch: persistence " << tlrmt::fmt12(fit.params.persistence()) << ", loglik "
              << tlrmt::fmt12(fit.loglik) << " -> " << dir.string() << "\n";
    return 0;
  }

  if (*simulate) {
    const auto dir = ensure_out_dir(opt.out);
    tlrmt::GfmScenario scenario = tlrmt::load_scenario(opt.scenario);
    if (opt.seed >= 0) scenario.seed = static_cast<std::uint64_t>(opt.seed);
    const tlrmt::GfmOutput output = tlrmt::generate(scenario);
    tlrmt::write_price_panel_csv(output.prices, (dir / "prices.csv").string());
    tlrmt::write_return_panel_csv(output.returns, (dir / "returns.csv").string());
    tlrmt::write_return_panel_csv(output.clean_returns, (dir / "returns_clean.csv").string());
    std::ofstream factor_csv(dir / "factor.csv");
    factor_csv << "date,M,sigma2\n";
    for (std::size_t k = 0; k < output.factor.size(); ++k)
      factor_csv << output.returns.timestamps[k] << ',' << tlrmt::fmt12(output.factor[k]) << ','
                 << tlrmt::fmt12(output.factor_variance[k]) << '\n';
    std::cout << "simulated " << scenario.n << " series x " << scenario.t << " (seed "
              << scenario.seed << ") -> " << dir.string() << "\n";
    return 0;
  }

  if (*noise) {
    const auto dir = ensure_out_dir(opt.out);
    const auto estimator = tlrmt::estimator_from_string(opt.estimator);
    const auto lags = parse_lags(opt.lags);
    const auto reps = static_cast<std::size_t>(opt.replicates);

    std::vector<std::vector<double>> curves(reps);
    std::vector<double> offdiag_std(reps);
    std::vector<int> outside(reps);
    tlrmt::parallel_for(
        reps,
        [&](std::size_t r) {
          const auto panel = tlrmt::noise_panel(opt.n, opt.t, seed + r);
          curves[r] = tlrmt::lambda_curve(panel, lags, estimator, tlrmt::SpectrumSource::Returns)
                          .lambda_max;
          const auto c0 = tlrmt::corr_matrix(panel, 0, tlrmt::CorrEstimator::Plain);
          const auto spectrum = tlrmt::svd_spectrum(c0);
          const auto bounds = tlrmt::wishart_bounds(opt.n, opt.t);
          int count = 0;
          for (double v : spectrum)
            if (v > bounds.lambda_plus || v < bounds.lambda_minus) ++count;
          outside[r] = count;
          double sum2 = 0.0;
          int pairs = 0;
          for (Eigen::Index i = 0; i < c0.size(); ++i)
            for (Eigen::Index jdx = i + 1; jdx < c0.size(); ++jdx) {
              sum2 += c0.values(i, jdx) * c0.values(i, jdx);
              ++pairs;
            }
          offdiag_std[r] = std::sqrt(sum2 / pairs);
        },
        opt.threads);

    std::ofstream curve_csv(dir / "noise_lambda.csv");
    curve_csv << "lag,mean_lambda_L,std_lambda_L\n";
    for (std::size_t k = 0; k < lags.size(); ++k) {
      std::vector<double> values(reps);
      for (std::size_t r = 0; r < reps; ++r) values[r] = curves[r][k];
      curve_csv << lags[k] << ',' << tlrmt::fmt12(tlrmt::mean(values)) << ','
                << tlrmt::fmt12(tlrmt::stddev(values)) << '\n';
    }

    const auto bounds = tlrmt::wishart_bounds(opt.n, opt.t);
    double total_outside = 0.0;
    for (int c : outside) total_outside += c;
    json j = {{"n", opt.n},
              {"t", opt.t},
              {"q", bounds.q},
              {"lambda_plus", bounds.lambda_plus},
              {"lambda_minus", bounds.lambda_minus},
              {"sigma_w", bounds.sigma_w},
              {"replicates", opt.replicates},
              {"eigenvalues_outside_fraction",
               total_outside / (static_cast<double>(reps) * opt.n)},
              {"offdiag_std_mean", tlrmt::mean(offdiag_std)},
              {"offdiag_std_over_sigma_w", tlrmt::mean(offdiag_std) / bounds.sigma_w}};
    tlrmt::write_json(j, (dir / "wishart.json").string());
    std::cout << "noise baseline over " << reps << " replicates -> " << dir.string() << "\n";
    return 0;
  }

  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
