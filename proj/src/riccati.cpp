#include "frheston/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace frh {

const char* to_string(RiccatiKind k) {
  switch (k) {
    case RiccatiKind::Finite: return "finite";
    case RiccatiKind::Limit: return "limit";
    case RiccatiKind::Rough: return "rough";
  }
  return "unknown";
}

bool RiccatiSolution::reaches(double t) const {
  return !tau.empty() && t <= tau.back() + 1e-12 * std::max(1.0, horizon);
}

namespace {

double interp(const RiccatiSolution& s, const std::vector<double>& v, double t) {
  if (t < 0.0) throw DomainError("Riccati solution queried at negative tau");
  if (!s.reaches(t)) throw BlowUpError("Riccati solution does not reach the requested tau");
  const double pos = t / s.step;
  auto i = static_cast<std::size_t>(std::floor(pos));
  if (i >= v.size() - 1) return v.back();
  const double f = pos - static_cast<double>(i);
  if (f < 1e-9) return v[i];
  if (f > 1.0 - 1e-9) return v[i + 1];
  return v[i] + f * (v[i + 1] - v[i]);
}

}  // namespace

double RiccatiSolution::varphi_at(double t) const { return interp(*this, varphi, t); }
double RiccatiSolution::phi_big_at(double t) const { return interp(*this, phi_big, t); }

double RiccatiSolution::terminal_varphi() const {
  if (blow_up) throw BlowUpError("Riccati solution blew up at tau = " + std::to_string(*blow_up));
  return varphi.back();
}

double RiccatiSolution::terminal_phi_big() const {
  if (blow_up) throw BlowUpError("Riccati solution blew up at tau = " + std::to_string(*blow_up));
  return phi_big.back();
}

double psi(double tau, double q, double x, double eta) {
  if (!(x > 0.0)) throw DomainError("psi: x must be positive");
  if (tau < 0.0) throw DomainError("psi: tau must be nonnegative");
  return eta * q * (-std::expm1(-x * tau)) / x;
}

std::vector<double> psi_vector(double tau, const QuantizedMeasure& qm, double eta) {
  std::vector<double> out(qm.size());
  for (std::size_t i = 0; i < qm.size(); ++i) out[i] = psi(tau, qm.weights[i], qm.nodes[i], eta);
  return out;
}

double rough_h(double t, double T, const QuantizedMeasure& qm) {
  if (t < 0.0 || t > T) throw DomainError("rough_h: t must lie in [0, T]");
  double s = 0.0;
  for (std::size_t i = 0; i < qm.size(); ++i) {
    const double x = qm.nodes[i];
    s += qm.weights[i] * std::expm1(-x * t) * std::expm1(-x * (T - t)) / (x * x);
  }
  return s;
}

namespace {

struct Pair {
  double a;  // varphi, or the regular part u in the rough case
  double b;  // Phi
};

using Rhs = std::function<Pair(double, const Pair&)>;

Pair rk4(const Rhs& f, double t, double dt, const Pair& y) {
  const Pair k1 = f(t, y);
  const Pair k2 = f(t + 0.5 * dt, {y.a + 0.5 * dt * k1.a, y.b + 0.5 * dt * k1.b});
  const Pair k3 = f(t + 0.5 * dt, {y.a + 0.5 * dt * k2.a, y.b + 0.5 * dt * k2.b});
  const Pair k4 = f(t + dt, {y.a + dt * k3.a, y.b + dt * k3.b});
  return {y.a + dt / 6.0 * (k1.a + 2.0 * k2.a + 2.0 * k3.a + k4.a),
          y.b + dt / 6.0 * (k1.b + 2.0 * k2.b + 2.0 * k3.b + k4.b)};
}

// A node of the integration mesh; grid >= 0 marks an output point tau = grid * step.
struct Node {
  double tau;
  long grid;
};

// Integrates over the mesh, recording at output points. `shift(tau)` maps the integrated
// first component to varphi.
RiccatiSolution integrate(RiccatiKind kind, const ModelParams& p, const TimeGrid& g, const std::vector<Node>& mesh,
                          const Rhs& f, const std::function<double(double)>& shift) {
  RiccatiSolution sol{kind, g.horizon(), g.h(), p.eta(), {}, {}, {}, nullptr, std::nullopt};
  sol.tau.reserve(g.points());
  sol.varphi.reserve(g.points());
  sol.phi_big.reserve(g.points());
  sol.tau.push_back(0.0);
  sol.varphi.push_back(0.0);
  sol.phi_big.push_back(0.0);
  Pair y{0.0, 0.0};
  for (std::size_t i = 1; i < mesh.size(); ++i) {
    const double t0 = mesh[i - 1].tau;
    y = rk4(f, t0, mesh[i].tau - t0, y);
    const double vp = y.a + shift(mesh[i].tau);
    if (!std::isfinite(vp) || !std::isfinite(y.b) || std::abs(vp) > kBlowUpThreshold) {
      sol.blow_up = mesh[i].tau;
      break;
    }
    if (mesh[i].grid >= 0) {
      sol.tau.push_back(g.t(static_cast<std::size_t>(mesh[i].grid)));
      sol.varphi.push_back(vp);
      sol.phi_big.push_back(y.b);
    }
  }
  return sol;
}

std::vector<Node> uniform_mesh(const TimeGrid& g) {
  std::vector<Node> m(g.points());
  for (std::size_t k = 0; k < g.points(); ++k) m[k] = {g.t(k), static_cast<long>(k)};
  return m;
}

void require_uncorrelated(const ModelParams& p, const char* who) {
  if (p.rho() != 0.0) throw RegimeError(std::string(who) + ": the affine solution requires rho = 0");
}

}  // namespace

RiccatiSolution solve_riccati_finite(const QuantizedMeasure& qm, const ModelParams& p, double T, double ode_step) {
  require_uncorrelated(p, "solve_riccati_finite");
  if (qm.kind != MeasureKind::Mu) throw RegimeError("solve_riccati_finite: needs a mu measure");
  const TimeGrid g(T, ode_step);
  const double eta = p.eta(), k = p.kappa(), half_s2 = 0.5 * p.sigma() * p.sigma();
  const double c0 = p.gamma() * p.r() + p.v0() * eta, kt = p.kappa() * p.theta();
  const auto forcing = [&qm](double tau) {
    double s = 0.0;
    for (std::size_t i = 0; i < qm.size(); ++i) s += qm.weights[i] * (-std::expm1(-qm.nodes[i] * tau)) / qm.nodes[i];
    return s;
  };
  const Rhs f = [&](double tau, const Pair& y) -> Pair {
    return {eta * forcing(tau) - k * y.a + half_s2 * y.a * y.a, c0 + kt * y.a};
  };
  auto sol = integrate(RiccatiKind::Finite, p, g, uniform_mesh(g), f, [](double) { return 0.0; });
  sol.qm = std::make_shared<QuantizedMeasure>(qm);
  return sol;
}

RiccatiSolution solve_riccati_limit(const ModelParams& p, double T, double ode_step) {
  require_uncorrelated(p, "solve_riccati_limit");
  const bool classical = p.regime().is_classical();
  if (!classical && !p.regime().is_fractional()) throw RegimeError("solve_riccati_limit: needs the fractional regime");
  const double alpha = classical ? 0.0 : p.alpha();
  const TimeGrid g(T, ode_step);
  const double eta = p.eta(), k = p.kappa(), half_s2 = 0.5 * p.sigma() * p.sigma();
  const double c0 = p.gamma() * p.r() + p.v0() * eta, kt = p.kappa() * p.theta();
  const double inv_g = 1.0 / gamma_fn(alpha + 1.0);
  const Rhs f = [&](double tau, const Pair& y) -> Pair {
    const double forcing = alpha == 0.0 ? 1.0 : std::pow(tau, alpha) * inv_g;
    return {eta * forcing - k * y.a + half_s2 * y.a * y.a, c0 + kt * y.a};
  };
  return integrate(RiccatiKind::Limit, p, g, uniform_mesh(g), f, [](double) { return 0.0; });
}

RiccatiSolution solve_riccati_rough(const QuantizedMeasure& qm_tilde, const ModelParams& p, double T,
                                    double ode_step) {
  require_uncorrelated(p, "solve_riccati_rough");
  if (!p.regime().is_rough()) throw RegimeError("solve_riccati_rough: needs the rough regime");
  if (qm_tilde.kind != MeasureKind::MuTilde) throw RegimeError("solve_riccati_rough: needs a mu_tilde measure");
  const double alpha = p.alpha();
  const TimeGrid g(T, ode_step);
  const double Th = g.horizon();
  const double eta = p.eta(), k = p.kappa(), s2 = p.sigma() * p.sigma();
  const double c0 = p.gamma() * p.r() + p.v0() * eta, kt = p.kappa() * p.theta();
  const double g1 = gamma_fn(1.0 - alpha);
  const double top = std::pow(Th, -alpha);
  // S(tau) = int_0^tau eta (T-s)^{-alpha-1} / Gamma(-alpha) ds
  const auto S = [=](double tau) {
    const double t = std::max(Th - tau, 0.0);
    return eta * (top - std::pow(t, -alpha)) / g1;
  };
  const Rhs f = [&](double tau, const Pair& y) -> Pair {
    const double t = std::clamp(Th - tau, 0.0, Th);
    const double h = rough_h(t, Th, qm_tilde);
    const double phi = y.a + S(tau);
    const double du = -k * phi + 0.5 * s2 * phi * phi - eta * h * (k - s2 * phi - 0.5 * s2 * eta * h);
    return {du, c0 + kt * (phi + eta * h)};
  };

  // uniform mesh in tau up to the last `window` steps, then j^2-graded nodes in t merged with the grid
  const std::size_t n = g.steps();
  const std::size_t window = std::min<std::size_t>(10, n);
  const std::size_t graded = 4 * window;
  std::vector<Node> mesh;
  mesh.reserve(n + graded + 2);
  for (std::size_t kk = 0; kk <= n - window; ++kk) mesh.push_back({g.t(kk), static_cast<long>(kk)});
  const double w = static_cast<double>(window) * g.h();
  std::vector<Node> tail;
  for (std::size_t j = 0; j < graded; ++j) {
    const double s = static_cast<double>(graded - j) / static_cast<double>(graded);
    tail.push_back({Th - w * s * s, -1});
  }
  for (std::size_t kk = n - window + 1; kk <= n; ++kk) tail.push_back({g.t(kk), static_cast<long>(kk)});
  std::sort(tail.begin(), tail.end(), [](const Node& a, const Node& b) { return a.tau < b.tau; });
  const double eps = 1e-9 * g.h();
  for (const Node& nd : tail) {
    if (nd.tau <= mesh.back().tau + eps) {
      if (nd.grid >= 0 && std::abs(nd.tau - mesh.back().tau) <= eps) mesh.back().grid = nd.grid;
      continue;
    }
    // drop a graded node that nearly coincides with the next grid node
    if (nd.grid < 0) {
      const double next_grid = std::ceil((nd.tau - eps) / g.h()) * g.h();
      if (std::abs(next_grid - nd.tau) <= eps) continue;
    }
    mesh.push_back(nd);
  }
  auto sol = integrate(RiccatiKind::Rough, p, g, mesh, f, S);
  sol.qm = std::make_shared<QuantizedMeasure>(qm_tilde);
  return sol;
}

double AffineValue::reassemble() const { return prefactor * std::exp(exponent()); }

namespace {

double prefactor(const ModelParams& p, double w) {
  if (!(w > 0.0)) throw ArgumentError("value: wealth must be positive");
  return std::pow(w, p.gamma()) / p.gamma();
}

}  // namespace

AffineValue value_function(const ModelParams& p, const RiccatiSolution& sol, double w, double z) {
  AffineValue v;
  v.prefactor = prefactor(p, w);
  v.phi_big = sol.terminal_phi_big();
  v.varphi_z = sol.terminal_varphi() * z;
  v.value = v.reassemble();
  return v;
}

AffineValue value_function_at_t(const ModelParams& p, const RiccatiSolution& sol, double t, double w,
                                const std::vector<double>& y, double z) {
  if (t < 0.0 || t > sol.horizon + 1e-12) throw ArgumentError("value_function_at_t: t must lie in [0, T]");
  const double tau = std::max(sol.horizon - t, 0.0);
  AffineValue v;
  v.prefactor = prefactor(p, w);
  v.phi_big = sol.phi_big_at(tau);
  v.varphi_z = sol.varphi_at(tau) * z;
  if (!y.empty()) {
    if (!sol.qm || sol.qm->size() != y.size()) throw ArgumentError("value_function_at_t: factor count does not match atoms");
    if (sol.kind != RiccatiKind::Finite) throw RegimeError("value_function_at_t: factor states need a finite solution");
    const auto ps = psi_vector(tau, *sol.qm, sol.eta);
    for (std::size_t i = 0; i < y.size(); ++i) v.psi_y += ps[i] * y[i];
  }
  v.value = v.reassemble();
  return v;
}

AffineValue value_function_limit_at_t(const ModelParams& p, const RiccatiSolution& sol, double t, double w, double z,
                                      double history) {
  if (sol.kind != RiccatiKind::Limit) throw RegimeError("value_function_limit_at_t: needs a limit solution");
  AffineValue v = value_function_at_t(p, sol, t, w, {}, z);
  v.history = history;
  v.value = v.reassemble();
  return v;
}

namespace {

void check_history(const std::vector<double>& z, double t, double T, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw RegimeError("history term needs alpha in (0,1)");
  if (t < 0.0) throw ArgumentError("history term: t must be nonnegative");
  if (!(t < T)) throw ArgumentError("history term: t must be smaller than T");
  if (z.empty()) throw ArgumentError("history term: empty Z history");
  if (z.size() == 1 && t != 0.0) throw ArgumentError("history term: a single sample only covers t = 0");
}

}  // namespace

double history_term(const std::vector<double>& z_history, double t, double T, double alpha, double eta) {
  check_history(z_history, t, T, alpha);
  if (t == 0.0) return 0.0;
  const std::size_t m = z_history.size() - 1;
  const double h = t / static_cast<double>(m);
  const double a1 = alpha + 1.0;
  double s = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double u0 = static_cast<double>(j) * h;
    const double u1 = (j + 1 == m) ? t : static_cast<double>(j + 1) * h;
    const double cell = std::pow(T - u0, a1) - std::pow(T - u1, a1) - std::pow(t - u0, a1) + std::pow(t - u1, a1);
    s += z_history[j] * cell;
  }
  return eta * s / gamma_fn(alpha + 2.0);
}

double history_term_quadrature(const std::vector<double>& z_history, double t, double T, double alpha, double eta) {
  check_history(z_history, t, T, alpha);
  if (t == 0.0) return 0.0;
  const std::size_t m = z_history.size() - 1;
  const double h = t / static_cast<double>(m);
  const double norm = gamma_fn(alpha) * gamma_fn(1.0 - alpha);
  // x = e^s; integrand of mu(dx) times sum_j Z_j int_{u_j}^{u_{j+1}} e^{-(t-u)x} (1 - e^{-(T-t)x}) / x du
  const auto f = [&](double s) {
    const double x = std::exp(s);
    if (!(x > 0.0) || !std::isfinite(x)) return 0.0;
    const double a = -std::expm1(-h * x);
    const double b = -std::expm1(-(T - t) * x);
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double lag = t - static_cast<double>(j + 1) * h;
      acc += z_history[j] * std::exp(-std::max(lag, 0.0) * x);
    }
    return (a / x) * (b / x) * std::pow(x, 1.0 - alpha) * acc / norm;
  };
  double err = 0.0;
  const double val = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), 25, 1e-12, &err);
  return eta * val;
}

double history_lower_bound(const std::vector<double>& z_history, double t, double T, double alpha, double eta) {
  check_history(z_history, t, T, alpha);
  if (t == 0.0) return 0.0;
  const std::size_t m = z_history.size() - 1;
  const double h = t / static_cast<double>(m);
  double s = 0.0;
  for (std::size_t j = 0; j < m; ++j) s += z_history[j] * h;
  return eta * (T - t) / (gamma_fn(alpha) * std::pow(T, 1.0 - alpha)) * s;
}

double optimal_strategy(const ModelParams& p, const StrategyState& s) {
  const double merton = p.merton_ratio();
  if (p.rho() == 0.0) return merton;
  if (!s.gradient_ratio) throw ArgumentError("optimal_strategy: rho != 0 needs a g_z/g estimate");
  if (!(s.nu > 0.0)) throw DomainError("optimal_strategy: volatility must be positive");
  if (s.z < 0.0) throw DomainError("optimal_strategy: z must be nonnegative");
  return merton + p.c_exponent() * p.sigma() * p.rho() / (1.0 - p.gamma()) * std::sqrt(s.z / s.nu) * *s.gradient_ratio;
}

}  // namespace frh
