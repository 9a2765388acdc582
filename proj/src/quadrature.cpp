#include "iontrap/quadrature.hpp"

#include <cmath>
#include <stdexcept>

#include "iontrap/constants.hpp"

namespace iontrap {

QuadratureRule gauss_legendre(std::size_t n) {
  if (n == 0) throw std::invalid_argument("gauss_legendre: n must be positive");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    long double x = std::cos(constants::pi * (static_cast<double>(i) + 0.75) /
                             (static_cast<double>(n) + 0.5));
    long double dp = 0.0L;
    for (int it = 0; it < 100; ++it) {
      long double p0 = 1.0L, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const long double p2 =
            ((2.0L * k - 1.0L) * x * p1 - (k - 1.0L) * p0) / static_cast<long double>(k);
        p0 = p1;
        p1 = p2;
      }
      dp = static_cast<long double>(n) * (x * p1 - p0) / (x * x - 1.0L);
      const long double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-19L) break;
    }
    const long double w = 2.0L / ((1.0L - x * x) * dp * dp);
    rule.nodes[i] = -static_cast<double>(x);
    rule.nodes[n - 1 - i] = static_cast<double>(x);
    rule.weights[i] = rule.weights[n - 1 - i] = static_cast<double>(w);
  }
  return rule;
}

QuadratureRule gauss_laguerre(std::size_t n) {
  if (n == 0) throw std::invalid_argument("gauss_laguerre: n must be positive");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const long double nn = static_cast<long double>(n);
  long double z = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    // Initial guesses after the classic asymptotic recipe.
    if (i == 0) {
      z = 3.0L / (1.0L + 2.4L * nn);
    } else if (i == 1) {
      z += 15.0L / (1.0L + 2.5L * nn);
    } else {
      const long double ai = static_cast<long double>(i - 1);
      z += ((1.0L + 2.55L * ai) / (1.9L * ai)) * (z - rule.nodes[i - 2]);
    }
    long double pp = 0.0L, p2 = 0.0L;
    for (int it = 0; it < 200; ++it) {
      long double p1 = 1.0L;
      p2 = 0.0L;
      for (std::size_t j = 1; j <= n; ++j) {
        const long double p3 = p2;
        p2 = p1;
        const long double jj = static_cast<long double>(j);
        p1 = ((2.0L * jj - 1.0L - z) * p2 - (jj - 1.0L) * p3) / jj;
      }
      pp = nn * (p1 - p2) / z;
      const long double z1 = z;
      z = z1 - p1 / pp;
      if (std::fabs(z - z1) <= 1e-18L * std::fabs(z)) break;
    }
    rule.nodes[i] = static_cast<double>(z);
    rule.weights[i] = static_cast<double>(-1.0L / (pp * nn * p2));
  }
  return rule;
}

}  // namespace iontrap
