#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "frheston/core.hpp"

namespace frh {

// Mu:      mu(dx)  = x^(-alpha)  dx / (Gamma(alpha) Gamma(1-alpha)),  alpha in (0,1)
// MuTilde: mu~(dx) = x^(alpha+1) dx / (Gamma(-alpha) Gamma(alpha+1)), alpha in (-1,-1/2)
enum class MeasureKind { Mu, MuTilde };

const char* to_string(MeasureKind kind);

// Throws unless alpha is in the window of `kind`.
void check_alpha(double alpha, MeasureKind kind);

// Strictly increasing positive points xi_0 < ... < xi_n.
class Partition {
 public:
  Partition(std::vector<double> points, int level);

  const std::vector<double>& points() const { return points_; }
  int level() const { return level_; }
  std::size_t cells() const { return points_.size() - 1; }
  double front() const { return points_.front(); }
  double back() const { return points_.back(); }
  // max_i |xi_{i+1} - xi_i|
  double mesh() const;

 private:
  std::vector<double> points_;
  int level_;
};

// Geometric grid xi_i = n^-2 * (n^4)^(i/n), i = 0..n (n cells, n+1 points).
Partition make_partition(std::size_t n, double alpha, MeasureKind kind);

// Inserts all log-midpoints, prepends xi_0/4 and appends 4 xi_n. The result contains
// every input point, has 2|p|+1 points and level + 1.
Partition refine(const Partition& p);

// Exact mass of the cell (lo, hi).
double cell_weight(double lo, double hi, double alpha, MeasureKind kind);

// Exact barycenter of the cell (lo, hi); lies strictly inside.
double cell_barycenter(double lo, double hi, double alpha, MeasureKind kind);

// Discrete measure sum_i q_i delta_{x_i} with atoms at cell barycenters.
struct QuantizedMeasure {
  MeasureKind kind;
  double alpha;
  std::vector<double> nodes;
  std::vector<double> weights;
  Partition source;

  std::size_t size() const { return nodes.size(); }
  double total_mass() const;
};

QuantizedMeasure quantize(const Partition& p, double alpha, MeasureKind kind);

// sum_i q_i exp(-t x_i)
double approx_kernel(double t, const QuantizedMeasure& qm);

// make_partition(n0) followed by `levels` successive refinements, quantized; size levels+1.
std::vector<QuantizedMeasure> dyadic_chain(std::size_t n0, int levels, double alpha, MeasureKind kind);

// CSV columns: index, xi_lo, xi_hi, node, weight
void write_csv(std::ostream& os, const QuantizedMeasure& qm);

}  // namespace frh
