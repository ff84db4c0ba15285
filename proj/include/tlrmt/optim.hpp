#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace tlrmt {

struct NelderMeadResult {
  std::vector<double> x;
  double fx = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

/// Derivative-free simplex minimizer (standard Nelder-Mead coefficients).
/// Good enough for the low-dimensional likelihood surfaces used here.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0, double step = 0.25,
                                    int max_iterations = 2000, double f_tol = 1e-10) {
  const std::size_t n = x0.size();
  if (n == 0) throw std::invalid_argument("nelder_mead: empty start point");

  std::vector<std::vector<double>> simplex(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += step;
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fv[i] = f(simplex[i]);

  NelderMeadResult result;
  std::vector<std::size_t> order(n + 1);
  for (result.iterations = 0; result.iterations < max_iterations; ++result.iterations) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order[0], worst = order[n], second_worst = order[n - 1];

    if (std::abs(fv[worst] - fv[best]) <= f_tol * (std::abs(fv[best]) + f_tol)) {
      result.converged = true;
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    auto blend = [&](double coeff) {
      std::vector<double> p(n);
      for (std::size_t k = 0; k < n; ++k)
        p[k] = centroid[k] + coeff * (simplex[worst][k] - centroid[k]);
      return p;
    };

    const auto reflected = blend(-1.0);
    const double f_reflected = f(reflected);
    if (f_reflected < fv[order[0]]) {
      const auto expanded = blend(-2.0);
      const double f_expanded = f(expanded);
      if (f_expanded < f_reflected) {
        simplex[worst] = expanded;
        fv[worst] = f_expanded;
      } else {
        simplex[worst] = reflected;
        fv[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected < fv[second_worst]) {
      simplex[worst] = reflected;
      fv[worst] = f_reflected;
      continue;
    }
    const auto contracted = blend(f_reflected < fv[worst] ? -0.5 : 0.5);
    const double f_contracted = f(contracted);
    if (f_contracted < std::min(f_reflected, fv[worst])) {
      simplex[worst] = contracted;
      fv[worst] = f_contracted;
      continue;
    }
    // Shrink toward the best vertex.
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t k = 0; k < n; ++k)
        simplex[i][k] = simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
      fv[i] = f(simplex[i]);
    }
  }

  const std::size_t best =
      static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  result.x = simplex[best];
  result.fx = fv[best];
  return result;
}

}  // namespace tlrmt
