#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "frheston/core.hpp"
#include "frheston/quantize.hpp"
#include "frheston/sim.hpp"

namespace frh {

enum class RiccatiKind { Finite, Limit, Rough };

const char* to_string(RiccatiKind k);

// Threshold on |varphi| that marks divergence.
inline constexpr double kBlowUpThreshold = 1e6;

// varphi(tau), Phi(tau) on tau_k = k * step. When blow_up is set the grids stop at the last
// finite point before it.
struct RiccatiSolution {
  RiccatiKind kind;
  double horizon;
  double step;
  double eta;
  std::vector<double> tau;
  std::vector<double> varphi;
  std::vector<double> phi_big;
  std::shared_ptr<const QuantizedMeasure> qm;
  std::optional<double> blow_up;

  bool reaches(double t) const;
  // Linear interpolation between grid points; throws BlowUpError beyond the solved range.
  double varphi_at(double t) const;
  double phi_big_at(double t) const;
  double terminal_varphi() const;
  double terminal_phi_big() const;
};

// eta q (1 - e^{-x tau}) / x
double psi(double tau, double q, double x, double eta);
std::vector<double> psi_vector(double tau, const QuantizedMeasure& qm, double eta);

// varphi' = eta sum_i q_i (1 - e^{-x_i tau}) / x_i - kappa varphi + sigma^2 varphi^2 / 2
// Phi'    = gamma r + v0 eta + kappa theta varphi
RiccatiSolution solve_riccati_finite(const QuantizedMeasure& qm, const ModelParams& p, double T, double ode_step);

// varphi' = eta tau^alpha / Gamma(alpha+1) - kappa varphi + sigma^2 varphi^2 / 2. alpha = 0 gives
// the classical Heston equation.
RiccatiSolution solve_riccati_limit(const ModelParams& p, double T, double ode_step);

// Rough system in tau = T - t:
//   varphi' = eta t^{-alpha-1}/Gamma(-alpha) - kappa varphi + sigma^2 varphi^2/2
//             - eta h(t) (kappa - sigma^2 varphi - sigma^2 eta h(t)/2)
//   Phi'    = gamma r + v0 eta + theta kappa (varphi + eta h(t))
// The singular forcing is integrated analytically; the remainder uses RK4 with j^2-graded
// sub-steps over the last 10 steps before t = 0.
RiccatiSolution solve_riccati_rough(const QuantizedMeasure& qm_tilde, const ModelParams& p, double T, double ode_step);

// h(t) = sum_i q_i (1 - e^{-x_i t}) (1 - e^{-x_i (T - t)}) / x_i^2
double rough_h(double t, double T, const QuantizedMeasure& qm);

// (1/gamma) w^gamma exp(Phi + varphi z + sum psi_i y_i + history)
struct AffineValue {
  double prefactor = 0.0;
  double phi_big = 0.0;
  double varphi_z = 0.0;
  double psi_y = 0.0;
  double history = 0.0;
  double value = 0.0;

  double exponent() const { return phi_big + varphi_z + psi_y + history; }
  double reassemble() const;
};

// Value at t = 0 from the solution at tau = horizon.
AffineValue value_function(const ModelParams& p, const RiccatiSolution& sol, double w, double z);

// Finite-dimensional value at time t with factor states y (one per atom of sol.qm).
AffineValue value_function_at_t(const ModelParams& p, const RiccatiSolution& sol, double t, double w,
                                const std::vector<double>& y, double z);

// Limit-case value at time t given the history exponent of the Z path on [0, t].
AffineValue value_function_limit_at_t(const ModelParams& p, const RiccatiSolution& sol, double t, double w, double z,
                                      double history);

// eta / Gamma(alpha+1) int_0^t ((T-u)^alpha - (t-u)^alpha) Z_u du, Z piecewise constant on the
// uniform grid of z_history (z_history.size() - 1 cells covering [0, t]).
double history_term(const std::vector<double>& z_history, double t, double T, double alpha, double eta);

// Same quantity from the defining double integral against mu(dx), by adaptive quadrature in log x.
double history_term_quadrature(const std::vector<double>& z_history, double t, double T, double alpha, double eta);

// eta (T - t) / (Gamma(alpha) T^{1-alpha}) int_0^t Z_u du, same Z convention.
double history_lower_bound(const std::vector<double>& z_history, double t, double T, double alpha, double eta);

struct StrategyState {
  double t = 0.0;
  double z = 0.0;
  double nu = 0.0;
  std::optional<double> gradient_ratio;  // g_z / g, needed when rho != 0
};

// lambda/(1-gamma) + c sigma rho/(1-gamma) sqrt(z/nu) g_z/g
double optimal_strategy(const ModelParams& p, const StrategyState& s);

struct EpsilonReport {
  double value_gap = 0.0;    // |V(level) - V(level+1)| from the finite Riccati values
  double utility_gap = 0.0;  // |U(quantized nu) - U(direct Euler nu)| under the level-L strategy
  double utility_se = 0.0;   // standard error of the paired utility difference
  double epsilon = 0.0;
};

// Certificate at dyadic level `level` of the chain started from make_partition(base_atoms).
// Requires rho = 0 and the fractional regime.
EpsilonReport epsilon_report(int level, const ModelParams& p, const TimeGrid& grid, std::size_t n_paths,
                             std::uint64_t seed, std::size_t base_atoms = 16, unsigned threads = 1);
double epsilon_diagnostic(int level, const ModelParams& p, const TimeGrid& grid, std::size_t n_paths,
                          std::uint64_t seed, std::size_t base_atoms = 16, unsigned threads = 1);

}  // namespace frh
