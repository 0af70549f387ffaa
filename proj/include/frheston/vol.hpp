#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "frheston/quantize.hpp"
#include "frheston/sim.hpp"

namespace frh {

enum class PositivityMap { Identity, AbsoluteValue, Exponential };

const char* to_string(PositivityMap m);
PositivityMap positivity_from_string(const std::string& s);

double apply_positivity(double nu, PositivityMap m);
// Identity throws DomainError on any negative entry.
std::vector<double> apply_positivity(const std::vector<double>& nu, PositivityMap m);

// Weights w_m = h^alpha (m^alpha - (m-1)^alpha) / Gamma(alpha+1), m = 1..steps.
class FractionalEulerKernel {
 public:
  FractionalEulerKernel(double alpha, const TimeGrid& grid);

  double alpha() const { return alpha_; }
  const std::vector<double>& weights() const { return w_; }
  // nu_k = v0 + sum_{j<k} w_{k-j} Z_j, O(steps^2)
  std::vector<double> nu(const std::vector<double>& z, double v0) const;
  // nu_k for a single k from Z_0..Z_{k-1}
  double nu_at(const std::vector<double>& z, std::size_t k, double v0) const;
  // h sum_{k<steps} nu_k in O(steps)
  double integrated(const std::vector<double>& z, double v0) const;

 private:
  double alpha_;
  double h_;
  std::vector<double> w_;    // w_[m], w_[0] unused
  std::vector<double> cum_;  // cum_[m] = h^{1+alpha} m^alpha / Gamma(alpha+1)
};

// Marchaud-type scheme for the rough regime.
class RoughMarchaudKernel {
 public:
  RoughMarchaudKernel(double alpha, double delta, const TimeGrid& grid);

  double alpha() const { return alpha_; }
  double delta() const { return delta_; }
  std::vector<double> nu(const std::vector<double>& z, double v0) const;

 private:
  double alpha_;
  double delta_;
  std::vector<double> lead_;  // (kh)^{-alpha-1} / Gamma(-alpha), lead_[0] = 0
  std::vector<double> c_;     // scaled lag coefficients, c_[0] unused
};

struct FractionalEuler {
  double alpha;
};
struct RoughMarchaud {
  double alpha;
  double delta = 0.49;
};
struct QuantizedFractional {
  std::shared_ptr<const QuantizedMeasure> qm;
};
struct QuantizedRough {
  std::shared_ptr<const QuantizedMeasure> qm;
};

using VolScheme = std::variant<FractionalEuler, RoughMarchaud, QuantizedFractional, QuantizedRough>;

// Checks the alpha / delta windows and measure kinds.
void validate(const VolScheme& s);
double scheme_alpha(const VolScheme& s);
bool is_rough(const VolScheme& s);
std::string describe(const VolScheme& s);

std::vector<double> nu_fractional_euler(const std::vector<double>& z, double alpha, const TimeGrid& grid, double v0 = 0.0);
// Left-endpoint h sum_{k<steps} nu_k; agrees with summing nu_fractional_euler.
double integrated_nu_fractional_euler(const std::vector<double>& z, double alpha, const TimeGrid& grid, double v0 = 0.0);

std::vector<double> nu_rough_marchaud(const std::vector<double>& z, double alpha, double delta, const TimeGrid& grid,
                                      double v0 = 0.0);

// v0 + sum_i q_i Y_i at every column.
std::vector<double> nu_quantized(double v0, const QuantizedMeasure& qm, const Eigen::MatrixXd& factors);

// v0 + Z_k t_k^{-alpha-1} / Gamma(-alpha) + sum_i q_i Ytilde_i; nu_0 = v0.
std::vector<double> nu_quantized_rough(double v0, const std::vector<double>& z, const QuantizedMeasure& qm,
                                       const Eigen::MatrixXd& rough_factors, const TimeGrid& grid);

// Dispatches on the scheme; quantized schemes build their factors from z internally.
std::vector<double> compute_nu(const VolScheme& s, const std::vector<double>& z, const TimeGrid& grid, double v0);

}  // namespace frh
