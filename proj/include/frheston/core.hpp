#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "frheston/errors.hpp"

namespace frh {

enum class RegimeKind { Fractional, Rough, ClassicalHeston };

// Volatility regime selected by alpha = 2H - 1.
//   Fractional:      alpha in (0, 1)      (H in (1/2, 1))
//   Rough:           alpha in (-1, -1/2)  (H in (0, 1/4))
//   ClassicalHeston: nu = v0 + Z, no alpha.
class Regime {
 public:
  static Regime fractional(double alpha);
  static Regime rough(double alpha);
  static Regime classical() { return Regime(RegimeKind::ClassicalHeston, std::nullopt); }
  // alpha == 0 and alpha == -1 map to ClassicalHeston; anything outside the two windows throws.
  static Regime from_alpha(double alpha);

  RegimeKind kind() const { return kind_; }
  bool is_fractional() const { return kind_ == RegimeKind::Fractional; }
  bool is_rough() const { return kind_ == RegimeKind::Rough; }
  bool is_classical() const { return kind_ == RegimeKind::ClassicalHeston; }
  // Throws RegimeError for ClassicalHeston.
  double alpha() const;
  std::string name() const;

 private:
  Regime(RegimeKind kind, std::optional<double> alpha) : kind_(kind), alpha_(alpha) {}
  RegimeKind kind_;
  std::optional<double> alpha_;
};

// Raw, unvalidated model inputs. Defaults are the reference scenario used by the CLI;
// sigma = 0.5 is a chosen default (not a published value) that satisfies Feller.
struct ModelInputs {
  double r = 0.02;
  double lambda = 0.5;
  double kappa = 6.0;
  double theta = 0.05;
  double sigma = 0.5;
  double rho = 0.0;
  double gamma = -2.0;
  double alpha = 0.75;
  double v0 = 0.0;
  double z0 = 0.05;
  double w0 = 1000.0;
  double horizon = 1.0;
};

// eta = gamma lambda^2 / (2 (1 - gamma)),  c = (1 - gamma) / (1 - gamma + gamma rho^2).
struct DerivedConstants {
  double eta;
  double c_exponent;
};

// Validated model parameters. Construction is the single validation point: every
// downstream routine assumes the invariants below hold.
//   kappa, theta, sigma > 0 and 2 kappa theta >= sigma^2
//   gamma < 1, gamma != 0, rho in (-1, 1), w0 > 0, v0 >= 0, z0 >= 0, horizon > 0
//   alpha in (0,1) (fractional), (-1,-1/2) (rough) or exactly 0 / -1 (classical)
class ModelParams {
 public:
  explicit ModelParams(const ModelInputs& in);

  const ModelInputs& inputs() const { return in_; }
  double r() const { return in_.r; }
  double lambda() const { return in_.lambda; }
  double kappa() const { return in_.kappa; }
  double theta() const { return in_.theta; }
  double sigma() const { return in_.sigma; }
  double rho() const { return in_.rho; }
  double gamma() const { return in_.gamma; }
  double alpha() const { return in_.alpha; }
  double hurst() const { return 0.5 * (in_.alpha + 1.0); }
  double v0() const { return in_.v0; }
  double z0() const { return in_.z0; }
  double w0() const { return in_.w0; }
  double horizon() const { return in_.horizon; }
  const Regime& regime() const { return regime_; }
  const DerivedConstants& derived() const { return derived_; }
  double eta() const { return derived_.eta; }
  double c_exponent() const { return derived_.c_exponent; }
  // lambda / (1 - gamma)
  double merton_ratio() const { return in_.lambda / (1.0 - in_.gamma); }

  ModelParams with_alpha(double alpha) const;
  ModelParams with_rho(double rho) const;
  ModelParams with_horizon(double horizon) const;

 private:
  ModelInputs in_;
  Regime regime_;
  DerivedConstants derived_;
};

DerivedConstants derived_constants(double gamma, double lambda, double rho);

// Euler Gamma function, z > 0.
double gamma_fn(double z);

// Riemann-Liouville kernel t^(alpha-1) / Gamma(alpha), t > 0.
double frac_kernel(double t, double alpha);

// Density of mu(dx) = dx / (x^alpha Gamma(alpha) Gamma(1-alpha)), alpha in (0,1).
double mu_density(double x, double alpha);

// Density of mu~(dx) = x^(alpha+1) dx / (Gamma(-alpha) Gamma(alpha+1)), alpha in (-1,-1/2).
double mu_tilde_density(double x, double alpha);

// E[Z_t] of the CIR factor.
double cir_mean(double t, const ModelParams& p);

// Cov(Z_s, Z_u) of the CIR factor started at z0. The middle exponential uses max(s, u), which makes
// Cov(Z_0, Z_u) vanish for any z0.
double cov_cir(double s, double u, const ModelParams& p);

// Cov(nu_{t+lag}, nu_t) of the fractional volatility, by Gauss-Jacobi double
// quadrature with quad_nodes per dimension.
double cov_nu(double t, double lag, const ModelParams& p, std::size_t quad_nodes);

}  // namespace frh
