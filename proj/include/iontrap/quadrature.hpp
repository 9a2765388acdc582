#pragma once

#include <cstddef>
#include <vector>

namespace iontrap {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(std::size_t n);

/// n-point Gauss-Laguerre rule for weight exp(-x) on [0, inf).
QuadratureRule gauss_laguerre(std::size_t n);

}  // namespace iontrap
