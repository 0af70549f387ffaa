#include "frheston/sim.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "frheston/csv.hpp"
#include "frheston/vol.hpp"

namespace frh {

TimeGrid::TimeGrid(double horizon, double h) : h_(h), steps_(0) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ArgumentError("TimeGrid: horizon must be positive");
  if (!(h > 0.0) || !std::isfinite(h)) throw ArgumentError("TimeGrid: step must be positive");
  const double n = std::round(horizon / h);
  if (n < 1.0 || std::abs(n * h - horizon) > 1e-12 * std::max(1.0, horizon)) {
    throw ArgumentError("TimeGrid: horizon is not an integer multiple of the step");
  }
  steps_ = static_cast<std::size_t>(n);
}

TimeGrid TimeGrid::from_steps(double horizon, std::size_t steps) {
  if (!(horizon > 0.0) || steps == 0) throw ArgumentError("TimeGrid: need horizon > 0 and steps >= 1");
  return TimeGrid(horizon / static_cast<double>(steps), steps, 0);
}

namespace {

std::mt19937_64 make_engine(const RngSpec& spec, Channel channel) {
  const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(spec.master_seed), hi(spec.master_seed), lo(spec.stream_id), hi(spec.stream_id),
                    static_cast<std::uint32_t>(channel)};
  return std::mt19937_64(seq);
}

}  // namespace

NormalStream::NormalStream(const RngSpec& spec, Channel channel) : engine_(make_engine(spec, channel)) {}

std::vector<double> brownian_increments(const TimeGrid& grid, const RngSpec& spec, Channel channel) {
  NormalStream n(spec, channel);
  const double sq = std::sqrt(grid.h());
  std::vector<double> out(grid.steps());
  for (auto& v : out) v = sq * n();
  return out;
}

std::vector<double> correlate(const std::vector<double>& dBz, const std::vector<double>& dBperp, double rho) {
  if (dBz.size() != dBperp.size()) throw ArgumentError("correlate: increment lengths differ");
  if (!(rho > -1.0 && rho < 1.0)) throw ArgumentError("correlate: rho must lie in (-1,1)");
  const double rc = std::sqrt(1.0 - rho * rho);
  std::vector<double> out(dBz.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = rho * dBz[k] + rc * dBperp[k];
  return out;
}

BrownianPair brownian_pair(const TimeGrid& grid, double rho, const RngSpec& spec) {
  BrownianPair bp;
  bp.dBz = brownian_increments(grid, spec, Channel::BrownianZ);
  bp.dBs = correlate(bp.dBz, brownian_increments(grid, spec, Channel::BrownianPerp), rho);
  return bp;
}

std::vector<double> simulate_cir(const ModelParams& p, const TimeGrid& grid, const std::vector<double>& dBz) {
  if (dBz.size() != grid.steps()) throw ArgumentError("simulate_cir: increment count does not match grid");
  const double k = p.kappa(), th = p.theta(), sig = p.sigma(), h = grid.h();
  std::vector<double> z(grid.points());
  double x = p.z0();
  z[0] = std::max(x, 0.0);
  for (std::size_t i = 0; i < grid.steps(); ++i) {
    const double xp = std::max(x, 0.0);
    x = x + k * (th - xp) * h + sig * std::sqrt(xp) * dBz[i];
    z[i + 1] = std::max(x, 0.0);
  }
  return z;
}

std::vector<double> simulate_cir(const ModelParams& p, const TimeGrid& grid, const RngSpec& spec) {
  return simulate_cir(p, grid, brownian_increments(grid, spec, Channel::BrownianZ));
}

std::vector<double> simulate_cir_exact(const ModelParams& p, const TimeGrid& grid, const RngSpec& spec) {
  auto eng = make_engine(spec, Channel::Aux);
  const double k = p.kappa(), h = grid.h(), sig2 = p.sigma() * p.sigma();
  const double ekh = std::exp(-k * h);
  const double c = sig2 * (-std::expm1(-k * h)) / (4.0 * k);
  const double d = 4.0 * k * p.theta() / sig2;
  std::vector<double> z(grid.points());
  z[0] = p.z0();
  for (std::size_t i = 0; i < grid.steps(); ++i) {
    const double lam = z[i] * ekh / c;
    long n = 0;
    if (lam > 0.0) n = std::poisson_distribution<long>(0.5 * lam)(eng);
    const double shape = 0.5 * d + static_cast<double>(n);
    const double chi2 = std::gamma_distribution<double>(shape, 2.0)(eng);
    z[i + 1] = c * chi2;
  }
  return z;
}

FactorIntegrator::FactorIntegrator(const std::vector<double>& nodes, double h) {
  decay_.reserve(nodes.size());
  gain_.reserve(nodes.size());
  gain_left_.reserve(nodes.size());
  for (double x : nodes) {
    if (!(x > 0.0)) throw ArgumentError("FactorIntegrator: nodes must be positive");
    decay_.push_back(std::exp(-x * h));
    gain_.push_back(-std::expm1(-x * h) / x);
    // int_0^h e^{-x (h-u)} (1 - u/h) du = (1 - e^{-y} (1 + y)) / (x^2 h), y = x h
    const double y = x * h;
    const double f = y < 1e-2 ? y * y * (0.5 - y * (1.0 / 3.0 - y * (0.125 - y * (1.0 / 30.0 - y / 144.0))))
                              : -std::expm1(-y) - y * std::exp(-y);
    gain_left_.push_back(f / (x * x * h));
  }
}

void FactorIntegrator::step(std::vector<double>& y, double z) const {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = decay_[i] * y[i] + z * gain_[i];
}

void FactorIntegrator::step_linear(std::vector<double>& y, double z0, double z1) const {
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = decay_[i] * y[i] + z0 * gain_left_[i] + z1 * (gain_[i] - gain_left_[i]);
  }
}

double FactorIntegrator::weighted_sum(const std::vector<double>& q, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += q[i] * y[i];
  return s;
}

namespace {

void check_path(const std::vector<double>& z, const TimeGrid& grid, const char* who) {
  if (z.size() != grid.points()) throw ArgumentError(std::string(who) + ": path length does not match grid");
}

}  // namespace

Eigen::MatrixXd simulate_factors(const QuantizedMeasure& qm, const std::vector<double>& z, const TimeGrid& grid) {
  if (qm.kind != MeasureKind::Mu) throw RegimeError("simulate_factors: needs a mu measure");
  check_path(z, grid, "simulate_factors");
  FactorIntegrator fi(qm.nodes, grid.h());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(qm.size()), static_cast<Eigen::Index>(grid.points()));
  std::vector<double> y(qm.size(), 0.0);
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    fi.step(y, z[k]);
    for (std::size_t i = 0; i < y.size(); ++i) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k + 1)) = y[i];
  }
  return out;
}

Eigen::MatrixXd simulate_factors_rough(const QuantizedMeasure& qm, const std::vector<double>& z, const TimeGrid& grid) {
  if (qm.kind != MeasureKind::MuTilde) throw RegimeError("simulate_factors_rough: needs a mu_tilde measure");
  check_path(z, grid, "simulate_factors_rough");
  FactorIntegrator fi(qm.nodes, grid.h());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(qm.size()), static_cast<Eigen::Index>(grid.points()));
  std::vector<double> y(qm.size(), 0.0);
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    fi.step_linear(y, z[k], z[k + 1]);
    const double t = grid.t(k + 1);
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double x = qm.nodes[i];
      const double j = -std::expm1(-x * t) / x;
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k + 1)) = z[k + 1] * j - y[i];
    }
  }
  return out;
}

namespace {

double tilde_drift_coef(const ModelParams& p) {
  return p.lambda() * p.gamma() * p.sigma() * p.rho() / (1.0 - p.gamma());
}

}  // namespace

TildeZPath simulate_tilde_z(const ModelParams& p, const QuantizedMeasure& qm, const TimeGrid& grid,
                            const std::vector<double>& dBz) {
  if (qm.kind != MeasureKind::Mu) throw RegimeError("simulate_tilde_z: needs a mu measure");
  if (dBz.size() != grid.steps()) throw ArgumentError("simulate_tilde_z: increment count does not match grid");
  const double k = p.kappa(), th = p.theta(), sig = p.sigma(), h = grid.h();
  const double coef = tilde_drift_coef(p);
  FactorIntegrator fi(qm.nodes, h);
  std::vector<double> y(qm.size(), 0.0);
  TildeZPath out{std::vector<double>(grid.points()), std::vector<double>(grid.points())};
  double x = p.z0();
  out.z[0] = std::max(x, 0.0);
  out.nu[0] = p.v0();
  for (std::size_t i = 0; i < grid.steps(); ++i) {
    const double xp = std::max(x, 0.0);
    double drift = k * (th - xp);
    if (coef != 0.0) drift += coef * std::sqrt(xp * out.nu[i]);
    x = x + drift * h + sig * std::sqrt(xp) * dBz[i];
    out.z[i + 1] = std::max(x, 0.0);
    fi.step(y, out.z[i]);
    out.nu[i + 1] = p.v0() + FactorIntegrator::weighted_sum(qm.weights, y);
  }
  return out;
}

TildeZPath simulate_tilde_z(const ModelParams& p, const QuantizedMeasure& qm, const TimeGrid& grid,
                            const RngSpec& spec) {
  return simulate_tilde_z(p, qm, grid, brownian_increments(grid, spec, Channel::BrownianZ));
}

TildeZPath simulate_tilde_z_euler(const ModelParams& p, const TimeGrid& grid, const std::vector<double>& dBz) {
  if (!p.regime().is_fractional()) throw RegimeError("simulate_tilde_z_euler: needs the fractional regime");
  if (dBz.size() != grid.steps()) throw ArgumentError("simulate_tilde_z_euler: increment count does not match grid");
  const double k = p.kappa(), th = p.theta(), sig = p.sigma(), h = grid.h();
  const double coef = tilde_drift_coef(p);
  const FractionalEulerKernel kern(p.alpha(), grid);
  TildeZPath out{std::vector<double>(grid.points()), std::vector<double>(grid.points())};
  double x = p.z0();
  out.z[0] = std::max(x, 0.0);
  out.nu[0] = p.v0();
  for (std::size_t i = 0; i < grid.steps(); ++i) {
    const double xp = std::max(x, 0.0);
    double drift = k * (th - xp);
    if (coef != 0.0) drift += coef * std::sqrt(xp * out.nu[i]);
    x = x + drift * h + sig * std::sqrt(xp) * dBz[i];
    out.z[i + 1] = std::max(x, 0.0);
    out.nu[i + 1] = kern.nu_at(out.z, i + 1, p.v0());
  }
  return out;
}

std::vector<double> simulate_wealth(const ModelParams& p, const TimeGrid& grid, const Strategy& pi,
                                    const std::vector<double>& nu, const std::vector<double>& z,
                                    const std::vector<double>& dBs) {
  check_path(nu, grid, "simulate_wealth");
  if (!z.empty()) check_path(z, grid, "simulate_wealth");
  if (dBs.size() != grid.steps()) throw ArgumentError("simulate_wealth: increment count does not match grid");
  if (!pi) throw ArgumentError("simulate_wealth: empty strategy");
  const double r = p.r(), lam = p.lambda(), h = grid.h();
  std::vector<double> w(grid.points());
  w[0] = p.w0();
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const double v = nu[k];
    if (v < 0.0) throw DomainError("simulate_wealth: negative volatility; apply a positivity map first");
    const double a = pi(MarketState{k, grid.t(k), w[k], z.empty() ? 0.0 : z[k], v});
    w[k + 1] = w[k] * std::exp((r + a * v * (lam - 0.5 * a)) * h + a * std::sqrt(v) * dBs[k]);
  }
  return w;
}

std::vector<double> simulate_stock(const ModelParams& p, const TimeGrid& grid, const std::vector<double>& nu,
                                   const std::vector<double>& dBs, double s0) {
  check_path(nu, grid, "simulate_stock");
  if (dBs.size() != grid.steps()) throw ArgumentError("simulate_stock: increment count does not match grid");
  if (!(s0 > 0.0)) throw ArgumentError("simulate_stock: s0 must be positive");
  const double r = p.r(), lam = p.lambda(), h = grid.h();
  std::vector<double> s(grid.points());
  s[0] = s0;
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const double v = nu[k];
    if (v < 0.0) throw DomainError("simulate_stock: negative volatility; apply a positivity map first");
    s[k + 1] = s[k] * std::exp((r + lam * v - 0.5 * v) * h + std::sqrt(v) * dBs[k]);
  }
  return s;
}

void write_csv(std::ostream& os, const PathBundle& b, bool with_factors) {
  csv::Writer w(os);
  const auto nf = with_factors ? static_cast<std::size_t>(b.factors.rows()) : 0;
  w.field("t").field("Z").field("nu").field("S").field("W");
  for (std::size_t i = 0; i < nf; ++i) w.field("y" + std::to_string(i));
  w.end_row();
  const auto put = [&](const std::vector<double>& v, std::size_t k) {
    if (k < v.size()) w.field(v[k]);
    else w.field(std::string_view{});
  };
  for (std::size_t k = 0; k < b.grid.points(); ++k) {
    w.field(b.grid.t(k));
    put(b.z, k);
    put(b.nu, k);
    put(b.s, k);
    put(b.w, k);
    for (std::size_t i = 0; i < nf; ++i) {
      w.field(b.factors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)));
    }
    w.end_row();
  }
}

}  // namespace frh
