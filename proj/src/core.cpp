#include "frheston/core.hpp"

#include <cmath>
#include <algorithm>

#include "frheston/gauss_jacobi.hpp"

namespace frh {

Regime Regime::fractional(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw RegimeError("fractional regime needs alpha in (0,1)");
  return Regime(RegimeKind::Fractional, alpha);
}

Regime Regime::rough(double alpha) {
  if (!(alpha > -1.0 && alpha < -0.5)) throw RegimeError("rough regime needs alpha in (-1,-1/2)");
  return Regime(RegimeKind::Rough, alpha);
}

Regime Regime::from_alpha(double alpha) {
  // Both classical limits: alpha -> 0 from the fractional side, alpha -> -1 from the rough side.
  if (alpha == 0.0 || alpha == -1.0) return classical();
  if (alpha > 0.0) return fractional(alpha);
  return rough(alpha);
}

double Regime::alpha() const {
  if (!alpha_) throw RegimeError("classical Heston regime carries no alpha");
  return *alpha_;
}

std::string Regime::name() const {
  switch (kind_) {
    case RegimeKind::Fractional: return "fractional";
    case RegimeKind::Rough: return "rough";
    case RegimeKind::ClassicalHeston: return "classical";
  }
  return "unknown";
}

DerivedConstants derived_constants(double gamma, double lambda, double rho) {
  const double denom = 1.0 - gamma + gamma * rho * rho;
  if (!(denom > 0.0)) throw ArgumentError("1 - gamma + gamma rho^2 must be positive");
  return DerivedConstants{0.5 * gamma * lambda * lambda / (1.0 - gamma), (1.0 - gamma) / denom};
}

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ArgumentError(std::string("ModelParams: ") + what);
}

}  // namespace

ModelParams::ModelParams(const ModelInputs& in)
    : in_(in), regime_(Regime::from_alpha(in.alpha)), derived_{} {
  const auto finite = [](double v) { return std::isfinite(v); };
  require(finite(in.r) && finite(in.lambda) && finite(in.kappa) && finite(in.theta) &&
              finite(in.sigma) && finite(in.rho) && finite(in.gamma) && finite(in.v0) &&
              finite(in.z0) && finite(in.w0) && finite(in.horizon),
          "all parameters must be finite");
  require(in.kappa > 0.0, "kappa must be positive");
  require(in.theta > 0.0, "theta must be positive");
  require(in.sigma > 0.0, "sigma must be positive");
  require(2.0 * in.kappa * in.theta >= in.sigma * in.sigma, "Feller condition 2 kappa theta >= sigma^2 violated");
  require(in.gamma < 1.0 && in.gamma != 0.0, "gamma must satisfy gamma < 1, gamma != 0");
  require(in.rho > -1.0 && in.rho < 1.0, "rho must lie in (-1,1)");
  require(in.w0 > 0.0, "w0 must be positive");
  require(in.v0 >= 0.0, "v0 must be nonnegative");
  require(in.z0 >= 0.0, "z0 must be nonnegative");
  require(in.horizon > 0.0, "horizon must be positive");
  derived_ = derived_constants(in.gamma, in.lambda, in.rho);
}

ModelParams ModelParams::with_alpha(double alpha) const {
  ModelInputs in = in_;
  in.alpha = alpha;
  return ModelParams(in);
}

ModelParams ModelParams::with_rho(double rho) const {
  ModelInputs in = in_;
  in.rho = rho;
  return ModelParams(in);
}

ModelParams ModelParams::with_horizon(double horizon) const {
  ModelInputs in = in_;
  in.horizon = horizon;
  return ModelParams(in);
}

double gamma_fn(double z) {
  if (!(z > 0.0) || !std::isfinite(z)) throw DomainError("gamma_fn: argument must be positive and finite");
  return std::tgamma(z);
}

double frac_kernel(double t, double alpha) {
  if (!(t > 0.0)) throw DomainError("frac_kernel: t must be positive");
  return std::pow(t, alpha - 1.0) / gamma_fn(alpha);
}

double mu_density(double x, double alpha) {
  if (!(x > 0.0)) throw DomainError("mu_density: x must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("mu_density: alpha must lie in (0,1)");
  return 1.0 / (std::pow(x, alpha) * gamma_fn(alpha) * gamma_fn(1.0 - alpha));
}

double mu_tilde_density(double x, double alpha) {
  if (!(x > 0.0)) throw DomainError("mu_tilde_density: x must be positive");
  if (!(alpha > -1.0 && alpha < -0.5)) throw DomainError("mu_tilde_density: alpha must lie in (-1,-1/2)");
  return std::pow(x, alpha + 1.0) / (gamma_fn(-alpha) * gamma_fn(alpha + 1.0));
}

double cir_mean(double t, const ModelParams& p) {
  return p.theta() + (p.z0() - p.theta()) * std::exp(-p.kappa() * t);
}

double cov_cir(double s, double u, const ModelParams& p) {
  if (s < 0.0 || u < 0.0) throw DomainError("cov_cir: times must be nonnegative");
  const double k = p.kappa();
  const double th = p.theta();
  const double z0 = p.z0();
  const double sig2 = p.sigma() * p.sigma();
  return sig2 * (th / (2.0 * k) * std::exp(-k * std::abs(s - u)) +
                 (z0 - th) / k * std::exp(-k * std::max(s, u)) -
                 (2.0 * z0 - th) / (2.0 * k) * std::exp(-k * (s + u)));
}

double cov_nu(double t, double lag, const ModelParams& p, std::size_t quad_nodes) {
  if (!p.regime().is_fractional()) throw RegimeError("cov_nu: only defined in the fractional regime");
  if (t < 0.0 || lag < 0.0) throw DomainError("cov_nu: t and lag must be nonnegative");
  if (t == 0.0) return 0.0;
  const double alpha = p.alpha();
  const double k = p.kappa();
  const double th = p.theta();
  const double z0 = p.z0();
  const double sig2 = p.sigma() * p.sigma();
  const QuadratureRule jac = gauss_jacobi_unit(quad_nodes, alpha - 1.0, 0.0);
  const QuadratureRule leg = gauss_legendre(quad_nodes, 0.0, 1.0);
  const double t2 = t + lag;

  // the two smooth branches of cov_cir(s, u): u <= s and u >= s, each valid past the kink
  const auto below = [&](double s, double u) {
    return sig2 * (th / (2.0 * k) * std::exp(-k * (s - u)) + (z0 - th) / k * std::exp(-k * s) -
                   (2.0 * z0 - th) / (2.0 * k) * std::exp(-k * (s + u)));
  };
  const auto above = [&](double s, double u) {
    return sig2 * (th / (2.0 * k) * std::exp(-k * (u - s)) + (z0 - th) / k * std::exp(-k * u) -
                   (2.0 * z0 - th) / (2.0 * k) * std::exp(-k * (s + u)));
  };
  // int_lo^T (T-u)^(alpha-1) f(u) du
  const auto to_end = [&](double lo, auto&& f) {
    const double len = t2 - lo;
    if (len <= 0.0) return 0.0;
    double acc = 0.0;
    for (std::size_t j = 0; j < jac.nodes.size(); ++j) acc += jac.weights[j] * f(lo + len * jac.nodes[j]);
    return std::pow(len, alpha) * acc;
  };
  // int_0^s (T-u)^(alpha-1) f(u) du, s <= T
  const auto head = [&](double s, auto&& f) {
    if (s <= 0.0) return 0.0;
    if (s <= t2 - s) {
      double acc = 0.0;
      for (std::size_t j = 0; j < leg.nodes.size(); ++j) {
        const double u = s * leg.nodes[j];
        acc += leg.weights[j] * std::pow(t2 - u, alpha - 1.0) * f(u);
      }
      return s * acc;
    }
    return to_end(0.0, f) - to_end(s, f);
  };
  // int_0^t (t-s)^(alpha-1) F(s) ds
  double acc = 0.0;
  for (std::size_t i = 0; i < jac.nodes.size(); ++i) {
    const double s = t * jac.nodes[i];
    const double inner = head(s, [&](double u) { return below(s, u); }) +
                         to_end(s, [&](double u) { return above(s, u); });
    acc += jac.weights[i] * inner;
  }
  const double g = gamma_fn(alpha);
  return std::pow(t, alpha) * acc / (g * g);
}

}  // namespace frh
