#include "frheston/gauss_jacobi.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "frheston/core.hpp"

namespace frh {

namespace {

QuadratureRule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& sub, double mu0) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw DomainError("golub_welsch: eigen solver failed");
  const auto n = diag.size();
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v0 = solver.eigenvectors()(0, i);
    rule.nodes[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
    rule.weights[static_cast<std::size_t>(i)] = mu0 * v0 * v0;
  }
  return rule;
}

}  // namespace

QuadratureRule gauss_jacobi_unit(std::size_t n, double a, double b) {
  if (n == 0) throw ArgumentError("gauss_jacobi_unit: need at least one node");
  if (!(a > -1.0) || !(b > -1.0)) throw ArgumentError("gauss_jacobi_unit: exponents must exceed -1");

  // Jacobi matrix for (1 - x)^a (1 + x)^b on [-1, 1].
  const auto N = static_cast<Eigen::Index>(n);
  Eigen::VectorXd diag(N);
  Eigen::VectorXd sub(N > 1 ? N - 1 : 0);
  const double ab = a + b;
  diag(0) = (b - a) / (ab + 2.0);
  for (Eigen::Index k = 1; k < N; ++k) {
    const double m = static_cast<double>(k);
    const double s = 2.0 * m + ab;
    diag(k) = (b * b - a * a) / (s * (s + 2.0));
  }
  for (Eigen::Index k = 1; k < N; ++k) {
    const double m = static_cast<double>(k);
    const double s = 2.0 * m + ab;
    double beta2;
    if (k == 1) {
      // (1 + a + b) cancels analytically.
      beta2 = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
    } else {
      beta2 = 4.0 * m * (m + a) * (m + b) * (m + ab) / (s * s * (s + 1.0) * (s - 1.0));
    }
    sub(k - 1) = std::sqrt(beta2);
  }
  // Total mass of (1-w)^a w^b on [0,1] is B(a+1, b+1).
  const double mu0 = gamma_fn(a + 1.0) * gamma_fn(b + 1.0) / gamma_fn(a + b + 2.0);
  QuadratureRule rule = golub_welsch(diag, sub, mu0);
  for (double& x : rule.nodes) x = 0.5 * (x + 1.0);
  return rule;
}

QuadratureRule gauss_legendre(std::size_t n, double lo, double hi) {
  QuadratureRule rule = gauss_jacobi_unit(n, 0.0, 0.0);
  const double width = hi - lo;
  for (std::size_t i = 0; i < n; ++i) {
    rule.nodes[i] = lo + width * rule.nodes[i];
    rule.weights[i] *= width;
  }
  return rule;
}

}  // namespace frh
