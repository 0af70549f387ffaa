#include "frheston/mc.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "frheston/csv.hpp"

namespace frh {

namespace {

struct Neumaier {
  double sum = 0.0;
  double comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) comp += (sum - t) + v;
    else comp += (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

}  // namespace

McEstimate summarize(const std::vector<double>& samples, std::uint64_t seed, std::string functional) {
  const std::size_t n = samples.size();
  if (n < 2) throw ArgumentError("summarize: need at least two samples");
  Neumaier s;
  for (double v : samples) s.add(v);
  const double mean = s.value() / static_cast<double>(n);
  Neumaier ss;
  for (double v : samples) ss.add((v - mean) * (v - mean));
  const double var = ss.value() / static_cast<double>(n - 1);
  return McEstimate{mean, std::sqrt(var / static_cast<double>(n)), n, seed, std::move(functional)};
}

std::vector<double> run_paths(std::size_t n_paths, std::size_t width, unsigned threads,
                              const std::function<void(std::uint64_t, double*)>& path) {
  std::vector<double> table(n_paths * width, 0.0);
  const unsigned nt = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n_paths, 1))));
  if (nt == 1) {
    for (std::size_t i = 0; i < n_paths; ++i) path(i, table.data() + i * width);
    return table;
  }
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  pool.reserve(nt);
  const std::size_t chunk = (n_paths + nt - 1) / nt;
  for (unsigned w = 0; w < nt; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n_paths, lo + chunk);
    pool.emplace_back([&, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) path(i, table.data() + i * width);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
  return table;
}

std::vector<double> column(const std::vector<double>& table, std::size_t width, std::size_t col) {
  std::vector<double> out(table.size() / width);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = table[i * width + col];
  return out;
}

std::string describe(const StrategySpec& s) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ConstantStrategy>) {
          return "constant(" + csv::num(v.pi) + ")";
        } else if constexpr (std::is_same_v<T, MertonRatio>) {
          return "merton";
        } else {
          return "affine_correction";
        }
      },
      s);
}

Strategy make_strategy(const StrategySpec& s, const ModelParams& p) {
  return std::visit(
      [&p](const auto& v) -> Strategy {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ConstantStrategy>) {
          const double pi = v.pi;
          return [pi](const MarketState&) { return pi; };
        } else if constexpr (std::is_same_v<T, MertonRatio>) {
          const double pi = p.merton_ratio();
          return [pi](const MarketState&) { return pi; };
        } else {
          if (!v.gradient_ratio) throw ArgumentError("AffineCorrection strategy needs a gradient source");
          auto src = v.gradient_ratio;
          return [p, src](const MarketState& m) {
            return optimal_strategy(p, StrategyState{m.t, m.z, m.nu, src(m)});
          };
        }
      },
      s);
}

namespace {

// Per-scheme precomputation shared read-only by all paths.
class NuEngine {
 public:
  NuEngine(const VolScheme& scheme, const TimeGrid& grid) : scheme_(scheme), grid_(grid) {
    validate(scheme);
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, FractionalEuler>) {
            frac_ = std::make_unique<FractionalEulerKernel>(v.alpha, grid);
          } else if constexpr (std::is_same_v<T, RoughMarchaud>) {
            rough_ = std::make_unique<RoughMarchaudKernel>(v.alpha, v.delta, grid);
          } else if constexpr (std::is_same_v<T, QuantizedFractional>) {
            qm_ = v.qm;
            fi_ = std::make_unique<FactorIntegrator>(v.qm->nodes, grid.h());
          } else {
            qm_ = v.qm;
            fi_ = std::make_unique<FactorIntegrator>(v.qm->nodes, grid.h());
            // nu_k = v0 + Z_k A_k - q.Y_k with A_k = t_k^{-alpha-1}/Gamma(-alpha) + sum_i q_i J_i(t_k)
            lead_.assign(grid.points(), 0.0);
            const double a = v.qm->alpha;
            const double g = gamma_fn(-a);
            for (std::size_t k = 1; k < grid.points(); ++k) {
              const double t = grid.t(k);
              double s = std::pow(t, -a - 1.0) / g;
              for (std::size_t i = 0; i < v.qm->size(); ++i) {
                s += v.qm->weights[i] * (-std::expm1(-v.qm->nodes[i] * t)) / v.qm->nodes[i];
              }
              lead_[k] = s;
            }
          }
        },
        scheme);
  }

  bool rough() const { return is_rough(scheme_); }
  bool fractional_euler() const { return frac_ != nullptr; }

  std::vector<double> nu(const std::vector<double>& z, double v0) const {
    if (frac_) return frac_->nu(z, v0);
    if (rough_) return rough_->nu(z, v0);
    std::vector<double> out(z.size());
    std::vector<double> y(qm_->size(), 0.0);
    out[0] = v0;
    for (std::size_t k = 0; k + 1 < z.size(); ++k) {
      if (lead_.empty()) fi_->step(y, z[k]);
      else fi_->step_linear(y, z[k], z[k + 1]);
      const double qy = FactorIntegrator::weighted_sum(qm_->weights, y);
      out[k + 1] = lead_.empty() ? v0 + qy : v0 + z[k + 1] * lead_[k + 1] - qy;
    }
    return out;
  }

  // h sum_{k<steps} a(nu_k)
  double integrated(const std::vector<double>& z, double v0, PositivityMap pos) const {
    if (frac_) return frac_->integrated(z, v0);
    const auto v = nu(z, v0);
    double s = 0.0;
    if (rough()) {
      for (std::size_t k = 0; k + 1 < v.size(); ++k) s += apply_positivity(v[k], pos);
    } else {
      for (std::size_t k = 0; k + 1 < v.size(); ++k) s += v[k];
    }
    return s * grid_.h();
  }

  const QuantizedMeasure* qm() const { return qm_.get(); }

 private:
  VolScheme scheme_;
  TimeGrid grid_;
  std::unique_ptr<FractionalEulerKernel> frac_;
  std::unique_ptr<RoughMarchaudKernel> rough_;
  std::shared_ptr<const QuantizedMeasure> qm_;
  std::unique_ptr<FactorIntegrator> fi_;
  std::vector<double> lead_;
};

void check_config(const McConfig& cfg) {
  if (cfg.n_paths < 2) throw ArgumentError("Monte Carlo needs at least two paths");
}

ModelParams with_z0(const ModelParams& p, double z0) {
  ModelInputs in = p.inputs();
  in.z0 = z0;
  return ModelParams(in);
}

}  // namespace

McEstimate mc_feynman_kac(const ModelParams& p, const VolScheme& scheme, const TimeGrid& grid, const McConfig& cfg,
                          PositivityMap pos) {
  check_config(cfg);
  const NuEngine eng(scheme, grid);
  const double c = p.c_exponent();
  const double drift = p.gamma() * p.r() * grid.horizon() / c;
  const double eta_c = p.eta() / c;
  const double v0 = p.v0();
  std::function<void(std::uint64_t, double*)> path;
  if (p.rho() == 0.0) {
    path = [&](std::uint64_t id, double* out) {
      const auto z = simulate_cir(p, grid, RngSpec{cfg.seed, id});
      out[0] = std::exp(drift + eta_c * eng.integrated(z, v0, pos));
    };
  } else {
    if (eng.rough()) throw RegimeError("mc_feynman_kac: rho != 0 is only supported in the fractional regime");
    const ModelParams pa = eng.fractional_euler() ? p.with_alpha(scheme_alpha(scheme)) : p;
    path = [&, pa](std::uint64_t id, double* out) {
      const auto dBz = brownian_increments(grid, RngSpec{cfg.seed, id}, Channel::BrownianZ);
      const TildeZPath tz = eng.fractional_euler() ? simulate_tilde_z_euler(pa, grid, dBz)
                                                   : simulate_tilde_z(pa, *eng.qm(), grid, dBz);
      double s = 0.0;
      for (std::size_t k = 0; k < grid.steps(); ++k) s += tz.nu[k];
      out[0] = std::exp(drift + eta_c * s * grid.h());
    };
  }
  const auto table = run_paths(cfg.n_paths, 1, cfg.threads, path);
  return summarize(table, cfg.seed, "feynman_kac[" + describe(scheme) + "]");
}

McEstimate mc_feynman_kac_from(const ModelParams& p, const QuantizedMeasure& qm, double t, double z,
                               const std::vector<double>& y, const TimeGrid& grid, const McConfig& cfg) {
  check_config(cfg);
  if (qm.kind != MeasureKind::Mu) throw RegimeError("mc_feynman_kac_from: needs a mu measure");
  if (y.size() != qm.size()) throw ArgumentError("mc_feynman_kac_from: factor count does not match atoms");
  const double pos = t / grid.h();
  const auto m = static_cast<std::size_t>(std::llround(pos));
  if (std::abs(pos - static_cast<double>(m)) > 1e-9 || m > grid.steps()) {
    throw ArgumentError("mc_feynman_kac_from: t must be a grid point in [0, T]");
  }
  const std::size_t rest = grid.steps() - m;
  const double c = p.c_exponent();
  const double eta_c = p.eta() / c;
  const double drift = p.gamma() * p.r() * static_cast<double>(rest) * grid.h() / c;
  if (rest == 0) {
    std::vector<double> ones(cfg.n_paths, 1.0);
    return summarize(ones, cfg.seed, "feynman_kac_from");
  }
  const TimeGrid sub = TimeGrid::from_steps(static_cast<double>(rest) * grid.h(), rest);
  const FactorIntegrator fi(qm.nodes, grid.h());
  const double k = p.kappa(), th = p.theta(), sig = p.sigma(), h = grid.h();
  const double coef = p.lambda() * p.gamma() * p.sigma() * p.rho() / (1.0 - p.gamma());
  const auto path = [&](std::uint64_t id, double* out) {
    const auto dBz = brownian_increments(sub, RngSpec{cfg.seed, id}, Channel::BrownianZ);
    std::vector<double> yy = y;
    double x = z;
    double s = 0.0;
    for (std::size_t i = 0; i < rest; ++i) {
      const double xp = std::max(x, 0.0);
      const double nu = p.v0() + FactorIntegrator::weighted_sum(qm.weights, yy);
      s += nu;
      double dr = k * (th - xp);
      if (coef != 0.0) dr += coef * std::sqrt(xp * nu);
      fi.step(yy, xp);
      x = x + dr * h + sig * std::sqrt(xp) * dBz[i];
    }
    out[0] = std::exp(drift + eta_c * s * h);
  };
  const auto table = run_paths(cfg.n_paths, 1, cfg.threads, path);
  return summarize(table, cfg.seed, "feynman_kac_from");
}

GradientEstimate estimate_gradient_ratio(const ModelParams& p, const VolScheme& scheme, const TimeGrid& grid,
                                         const McConfig& cfg, double bump) {
  if (!(bump > 0.0)) throw ArgumentError("estimate_gradient_ratio: bump must be positive");
  const double z0 = p.z0();
  const double dz = z0 > 0.0 ? z0 * bump : bump;
  const double lo = std::max(z0 - dz, 0.0);
  const double hi = z0 + dz;
  const double g = mc_feynman_kac(p, scheme, grid, cfg).mean;
  const double g_lo = mc_feynman_kac(with_z0(p, lo), scheme, grid, cfg).mean;
  const double g_hi = mc_feynman_kac(with_z0(p, hi), scheme, grid, cfg).mean;
  GradientEstimate out;
  out.g = g;
  out.g_z = (g_hi - g_lo) / (hi - lo);
  out.ratio = out.g_z / g;
  return out;
}

std::vector<McEstimate> mc_utility_crn(const ModelParams& p, const std::vector<StrategySpec>& strategies,
                                       const VolScheme& scheme, PositivityMap pos, const TimeGrid& grid,
                                       const McConfig& cfg) {
  check_config(cfg);
  if (strategies.empty()) throw ArgumentError("mc_utility_crn: no strategies");
  const NuEngine eng(scheme, grid);
  std::vector<Strategy> pis;
  pis.reserve(strategies.size());
  for (const auto& s : strategies) pis.push_back(make_strategy(s, p));
  const double gam = p.gamma();
  const std::size_t width = strategies.size();
  const auto path = [&](std::uint64_t id, double* out) {
    const RngSpec spec{cfg.seed, id};
    const auto bp = brownian_pair(grid, p.rho(), spec);
    const auto z = simulate_cir(p, grid, bp.dBz);
    auto nu = eng.nu(z, p.v0());
    if (eng.rough()) nu = apply_positivity(nu, pos);
    for (std::size_t s = 0; s < width; ++s) {
      const auto w = simulate_wealth(p, grid, pis[s], nu, z, bp.dBs);
      out[s] = std::pow(w.back(), gam) / gam;
    }
  };
  const auto table = run_paths(cfg.n_paths, width, cfg.threads, path);
  std::vector<McEstimate> out;
  out.reserve(width);
  for (std::size_t s = 0; s < width; ++s) {
    out.push_back(summarize(column(table, width, s), cfg.seed,
                            "utility[" + describe(strategies[s]) + "," + describe(scheme) + "]"));
  }
  return out;
}

McEstimate mc_utility(const ModelParams& p, const StrategySpec& strategy, const VolScheme& scheme, PositivityMap pos,
                      const TimeGrid& grid, const McConfig& cfg) {
  return mc_utility_crn(p, {strategy}, scheme, pos, grid, cfg).front();
}

McEstimate mc_value_rough(const ModelParams& p, const QuantizedMeasure& qm_tilde, PositivityMap pos,
                          const TimeGrid& grid, const McConfig& cfg) {
  check_config(cfg);
  if (p.rho() != 0.0) throw RegimeError("mc_value_rough: requires rho = 0");
  if (qm_tilde.kind != MeasureKind::MuTilde) throw RegimeError("mc_value_rough: needs a mu_tilde measure");
  const VolScheme scheme = QuantizedRough{std::make_shared<QuantizedMeasure>(qm_tilde)};
  const NuEngine eng(scheme, grid);
  const double pref = std::pow(p.w0(), p.gamma()) / p.gamma();
  const double drift = p.gamma() * p.r() * grid.horizon();
  const auto path = [&](std::uint64_t id, double* out) {
    const auto z = simulate_cir(p, grid, RngSpec{cfg.seed, id});
    out[0] = pref * std::exp(drift + p.eta() * eng.integrated(z, p.v0(), pos));
  };
  const auto table = run_paths(cfg.n_paths, 1, cfg.threads, path);
  return summarize(table, cfg.seed, std::string("value_rough[") + to_string(pos) + "]");
}

std::size_t count_negative_rough(const ModelParams& p, const QuantizedMeasure& qm_tilde, const TimeGrid& grid,
                                 const McConfig& cfg) {
  const VolScheme scheme = QuantizedRough{std::make_shared<QuantizedMeasure>(qm_tilde)};
  const NuEngine eng(scheme, grid);
  const auto path = [&](std::uint64_t id, double* out) {
    const auto z = simulate_cir(p, grid, RngSpec{cfg.seed, id});
    const auto nu = eng.nu(z, p.v0());
    out[0] = static_cast<double>(std::count_if(nu.begin(), nu.end(), [](double v) { return v < 0.0; }));
  };
  const auto table = run_paths(cfg.n_paths, 1, cfg.threads, path);
  double s = 0.0;
  for (double v : table) s += v;
  return static_cast<std::size_t>(s);
}

EpsilonReport epsilon_report(int level, const ModelParams& p, const TimeGrid& grid, std::size_t n_paths,
                             std::uint64_t seed, std::size_t base_atoms, unsigned threads) {
  if (level < 0) throw ArgumentError("epsilon_report: level must be nonnegative");
  if (p.rho() != 0.0) throw RegimeError("epsilon_report: requires rho = 0");
  if (!p.regime().is_fractional()) throw RegimeError("epsilon_report: requires the fractional regime");
  const auto chain = dyadic_chain(base_atoms, level + 1, p.alpha(), MeasureKind::Mu);
  const auto& coarse = chain[static_cast<std::size_t>(level)];
  const auto& fine = chain[static_cast<std::size_t>(level) + 1];
  const double T = grid.horizon();
  const double v_coarse = value_function(p, solve_riccati_finite(coarse, p, T, grid.h()), p.w0(), p.z0()).value;
  const double v_fine = value_function(p, solve_riccati_finite(fine, p, T, grid.h()), p.w0(), p.z0()).value;

  // the strategy optimal at this level; for rho = 0 it is the Merton ratio at every level
  const Strategy pi = make_strategy(MertonRatio{}, p);
  const NuEngine quant(QuantizedFractional{std::make_shared<QuantizedMeasure>(coarse)}, grid);
  const FractionalEulerKernel direct(p.alpha(), grid);
  const double gam = p.gamma();
  const auto path = [&](std::uint64_t id, double* out) {
    const auto bp = brownian_pair(grid, 0.0, RngSpec{seed, id});
    const auto z = simulate_cir(p, grid, bp.dBz);
    const auto wq = simulate_wealth(p, grid, pi, quant.nu(z, p.v0()), z, bp.dBs);
    const auto we = simulate_wealth(p, grid, pi, direct.nu(z, p.v0()), z, bp.dBs);
    out[0] = std::pow(wq.back(), gam) / gam - std::pow(we.back(), gam) / gam;
  };
  const auto est = summarize(run_paths(n_paths, 1, threads, path), seed, "utility_gap");
  EpsilonReport r;
  r.value_gap = std::abs(v_coarse - v_fine);
  r.utility_gap = std::abs(est.mean);
  r.utility_se = est.std_error;
  r.epsilon = r.value_gap + r.utility_gap;
  return r;
}

double epsilon_diagnostic(int level, const ModelParams& p, const TimeGrid& grid, std::size_t n_paths,
                          std::uint64_t seed, std::size_t base_atoms, unsigned threads) {
  return epsilon_report(level, p, grid, n_paths, seed, base_atoms, threads).epsilon;
}

ConvergenceReport convergence_study(const ModelParams& p, const std::vector<int>& levels, const TimeGrid& grid,
                                    const McConfig& cfg, std::size_t base_atoms) {
  if (levels.empty()) throw ArgumentError("convergence_study: no levels");
  if (!p.regime().is_fractional()) throw RegimeError("convergence_study: requires the fractional regime");
  if (p.rho() != 0.0) throw RegimeError("convergence_study: requires rho = 0");
  check_config(cfg);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] < 0 || (i > 0 && levels[i] <= levels[i - 1])) {
      throw ArgumentError("convergence_study: levels must be nonnegative and increasing");
    }
  }
  const int top = levels.back() + 1;
  const auto chain = dyadic_chain(base_atoms, top, p.alpha(), MeasureKind::Mu);
  const double T = grid.horizon();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double exact_kernel = frac_kernel(1.0, p.alpha());
  const double pref = std::pow(p.w0(), p.gamma()) / p.gamma();
  const std::size_t mono_paths = std::min<std::size_t>(cfg.n_paths, 100);

  ConvergenceReport rep;
  std::vector<ConvergenceRow> kernel, mono, ric, mcv;
  for (int L : levels) {
    const auto& qm = chain[static_cast<std::size_t>(L)];
    const auto& next = chain[static_cast<std::size_t>(L) + 1];

    const double ak = approx_kernel(1.0, qm);
    kernel.push_back({"kernel", L, qm.size(), 0, ak, 0.0, std::abs(exact_kernel - ak) / exact_kernel, nan, 0});

    const NuEngine e0(QuantizedFractional{std::make_shared<QuantizedMeasure>(qm)}, grid);
    const NuEngine e1(QuantizedFractional{std::make_shared<QuantizedMeasure>(next)}, grid);
    const auto viol = [&](std::uint64_t id, double* out) {
      const auto z = simulate_cir(p, grid, RngSpec{cfg.seed, id});
      const auto a = e0.nu(z, p.v0());
      const auto b = e1.nu(z, p.v0());
      std::size_t c = 0;
      for (std::size_t k = 0; k < a.size(); ++k) c += (a[k] > b[k]) ? 1 : 0;
      out[0] = static_cast<double>(c);
    };
    double vcount = 0.0;
    for (double v : run_paths(mono_paths, 1, cfg.threads, viol)) vcount += v;
    const auto nv = static_cast<std::size_t>(vcount);
    mono.push_back({"nu_monotone", L, qm.size(), mono_paths, vcount, 0.0, nan, nan, nv});

    const auto sol = solve_riccati_finite(qm, p, T, grid.h());
    const auto sol_next = solve_riccati_finite(next, p, T, grid.h());
    ConvergenceRow rr{"riccati_value", L, qm.size(), 0, nan, 0.0, nan, nan, 0};
    if (!sol.blow_up && !sol_next.blow_up) {
      rr.mean = value_function(p, sol, p.w0(), p.z0()).value;
      rr.gap = std::abs(rr.mean - value_function(p, sol_next, p.w0(), p.z0()).value);
      rr.epsilon = epsilon_diagnostic(L, p, grid, cfg.n_paths, cfg.seed, base_atoms, cfg.threads);
    }
    ric.push_back(rr);

    const auto fk = mc_feynman_kac(p, QuantizedFractional{std::make_shared<QuantizedMeasure>(qm)}, grid, cfg);
    mcv.push_back({"mc_value", L, qm.size(), fk.n_paths, pref * fk.mean, std::abs(pref) * fk.std_error, nan, nan, 0});
  }
  for (std::size_t i = 0; i + 1 < mcv.size(); ++i) mcv[i].gap = std::abs(mcv[i].mean - mcv[i + 1].mean);
  for (auto* group : {&kernel, &mono, &ric, &mcv}) {
    rep.rows.insert(rep.rows.end(), group->begin(), group->end());
  }
  return rep;
}

void write_csv(std::ostream& os, const ConvergenceReport& r) {
  csv::Writer w(os);
  w.header({"functional", "level", "n_paths", "mean", "std_error", "gap", "epsilon"});
  for (const auto& row : r.rows) {
    w.field(row.functional).field(row.level).field(row.n_paths).field(row.mean).field(row.std_error);
    w.field(row.gap).field(row.epsilon);
    w.end_row();
  }
}

}  // namespace frh
