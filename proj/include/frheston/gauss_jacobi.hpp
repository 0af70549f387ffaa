#pragma once

#include <cstddef>
#include <vector>

namespace frh {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Jacobi rule on [0, 1] for the weight w^(b) (1 - w)^(a), a, b > -1.
// Nodes from the Golub-Welsch eigenproblem of the Jacobi matrix.
QuadratureRule gauss_jacobi_unit(std::size_t n, double a, double b);

// Gauss-Legendre rule on [lo, hi].
QuadratureRule gauss_legendre(std::size_t n, double lo, double hi);

}  // namespace frh
