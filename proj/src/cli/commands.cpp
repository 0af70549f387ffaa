#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "frheston/csv.hpp"
#include "frheston/mc.hpp"
#include "frheston/quantize.hpp"
#include "frheston/riccati.hpp"
#include "frheston/sim.hpp"
#include "frheston/vol.hpp"

namespace frh::cli {

void Context::write_file(const std::string& name, const std::function<void(std::ostream&)>& body) {
  const auto path = out_dir / name;
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  body(os);
  os.flush();
  if (!os) throw IoError("write failed for '" + path.string() + "'");
  files.push_back(name);
}

void Context::fail_row(const std::string& what) {
  ++failed_rows;
  diag << "failed row: " << what << '\n';
}

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

double horizon_of(const ScenarioConfig& c, double fallback) { return c.horizon ? *c.horizon : fallback; }

ModelParams params_for(const ScenarioConfig& c, double alpha, double rho, double horizon) {
  ModelInputs in = c.model;
  in.alpha = alpha;
  in.rho = rho;
  in.horizon = horizon;
  return ModelParams(in);
}

std::string regime_name(double alpha) { return Regime::from_alpha(alpha).name(); }

std::shared_ptr<const QuantizedMeasure> measure_for(const ScenarioConfig& c, double alpha, int level) {
  const MeasureKind kind = alpha > 0.0 ? MeasureKind::Mu : MeasureKind::MuTilde;
  auto chain = dyadic_chain(c.base_atoms, level, alpha, kind);
  return std::make_shared<QuantizedMeasure>(std::move(chain.back()));
}

// nullopt for the classical regime
std::optional<VolScheme> scheme_for(const ScenarioConfig& c, double alpha) {
  const Regime reg = Regime::from_alpha(alpha);
  if (reg.is_classical()) return std::nullopt;
  if (c.scheme == "quantized") {
    auto qm = measure_for(c, alpha, c.scheme_level);
    if (reg.is_fractional()) return VolScheme{QuantizedFractional{qm}};
    return VolScheme{QuantizedRough{qm}};
  }
  if (reg.is_fractional()) return VolScheme{FractionalEuler{alpha}};
  return VolScheme{RoughMarchaud{alpha, c.delta}};
}

struct Volatility {
  std::vector<double> raw;   // nu as constructed
  std::vector<double> used;  // a(nu) in the rough regime, nu otherwise
};

Volatility volatility(const ScenarioConfig& c, const std::optional<VolScheme>& scheme, const std::vector<double>& z,
                      const TimeGrid& grid, PositivityMap pos) {
  Volatility v;
  if (!scheme) {
    v.raw.resize(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) v.raw[k] = c.model.v0 + z[k];
    v.used = v.raw;
    return v;
  }
  v.raw = compute_nu(*scheme, z, grid, c.model.v0);
  v.used = is_rough(*scheme) ? apply_positivity(v.raw, pos) : v.raw;
  return v;
}

std::size_t paths_or(const ScenarioConfig& c, std::size_t fallback) { return c.paths ? *c.paths : fallback; }

McConfig mc_config(const ScenarioConfig& c, std::size_t fallback_paths) {
  return McConfig{paths_or(c, fallback_paths), c.seed, c.threads};
}

// Type-7 sample quantile of sorted data.
double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return kNaN;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= sorted.size()) return sorted.back();
  const double f = pos - static_cast<double>(i);
  return sorted[i] + f * (sorted[i + 1] - sorted[i]);
}

}  // namespace

void cmd_simulate(Context& ctx) {
  const auto& c = ctx.cfg;
  const std::vector<double> def_frac = {0.05, 0.5, 0.95};
  const std::vector<double> def_rough = {-0.95, -0.75, -0.55};
  const auto alphas = c.alphas ? *c.alphas : (c.preset == "rough" ? def_rough : def_frac);
  const auto rhos = c.rhos ? *c.rhos : std::vector<double>{-0.7, 0.0, 0.7};
  const double T = horizon_of(c, c.model.horizon);
  const TimeGrid grid(T, c.h);

  struct PosRow {
    double alpha, rho;
    std::size_t path;
    double neg_fraction, min_nu, s_abs, s_exp;
  };
  std::vector<PosRow> pos_rows;

  for (double a : alphas) {
    for (double rho : rhos) {
      try {
        const ModelParams p = params_for(c, a, rho, T);
        const auto scheme = scheme_for(c, a);
        const Strategy merton = make_strategy(MertonRatio{}, p);
        for (std::size_t i = 0; i < c.sample_paths; ++i) {
          const RngSpec spec{c.seed, i};
          const auto bp = brownian_pair(grid, rho, spec);
          PathBundle b{grid, simulate_cir(p, grid, bp.dBz), {}, {}, {}, {}, spec, scheme ? describe(*scheme) : "classical"};
          const auto vol = volatility(c, scheme, b.z, grid, c.positivity);
          b.nu = vol.raw;
          b.s = simulate_stock(p, grid, vol.used, bp.dBs, c.s0);
          b.w = simulate_wealth(p, grid, merton, vol.used, b.z, bp.dBs);
          if (scheme && is_rough(*scheme)) {
            const auto neg = std::count_if(vol.raw.begin(), vol.raw.end(), [](double v) { return v < 0.0; });
            const double mn = *std::min_element(vol.raw.begin(), vol.raw.end());
            const auto s_abs = simulate_stock(p, grid, apply_positivity(vol.raw, PositivityMap::AbsoluteValue), bp.dBs, c.s0);
            const auto s_exp = simulate_stock(p, grid, apply_positivity(vol.raw, PositivityMap::Exponential), bp.dBs, c.s0);
            pos_rows.push_back({a, rho, i, static_cast<double>(neg) / static_cast<double>(vol.raw.size()), mn,
                                s_abs.back(), s_exp.back()});
          }
          ctx.write_file("simulate_alpha=" + tag(a) + "_rho=" + tag(rho) + "_path=" + std::to_string(i) + ".csv",
                         [&](std::ostream& os) { write_csv(os, b, false); });
        }
      } catch (const IoError&) {
        throw;
      } catch (const std::exception& e) {
        ctx.fail_row("simulate alpha=" + tag(a) + " rho=" + tag(rho) + ": " + e.what());
      }
    }
  }
  if (!pos_rows.empty()) {
    ctx.write_file("simulate_positivity.csv", [&](std::ostream& os) {
      csv::Writer w(os);
      w.header({"alpha", "rho", "path", "negative_fraction", "min_nu", "S_T_abs", "S_T_exp"});
      for (const auto& r : pos_rows) {
        w.field(r.alpha).field(r.rho).field(r.path).field(r.neg_fraction).field(r.min_nu).field(r.s_abs).field(r.s_exp);
        w.end_row();
      }
    });
  }
}

void cmd_quantize(Context& ctx) {
  const auto& c = ctx.cfg;
  const auto alphas = c.alphas ? *c.alphas : std::vector<double>{c.model.alpha};
  for (double a : alphas) {
    for (int L : c.levels) {
      try {
        if (Regime::from_alpha(a).is_classical()) throw RegimeError("no kernel measure in the classical regime");
        const auto qm = measure_for(c, a, L);
        ctx.write_file("quantize_alpha=" + tag(a) + "_level=" + std::to_string(L) + ".csv",
                       [&](std::ostream& os) { write_csv(os, *qm); });
      } catch (const IoError&) {
        throw;
      } catch (const std::exception& e) {
        ctx.fail_row("quantize alpha=" + tag(a) + " level=" + std::to_string(L) + ": " + e.what());
      }
    }
  }
}

void cmd_value(Context& ctx) {
  const auto& c = ctx.cfg;
  const auto alphas = c.alphas ? *c.alphas : std::vector<double>{c.model.alpha};
  const auto rhos = c.rhos ? *c.rhos : std::vector<double>{c.model.rho};
  const double T = horizon_of(c, c.model.horizon);
  const TimeGrid grid(T, c.h);
  const McConfig mc = mc_config(c, 10000);

  struct Row {
    std::string regime;
    double alpha, rho;
    int level;
    std::size_t atoms;
    double riccati = kNaN, mc = kNaN, se = kNaN, gap = kNaN;
    std::string status = "ok";
  };
  std::vector<Row> rows;

  const auto run_row = [&](Row r, const std::function<void(Row&)>& body) {
    try {
      body(r);
    } catch (const BlowUpError& e) {
      r.status = "blow_up";
      ctx.fail_row("value alpha=" + tag(r.alpha) + " level=" + std::to_string(r.level) + ": " + e.what());
    } catch (const std::exception& e) {
      r.status = "error";
      ctx.fail_row("value alpha=" + tag(r.alpha) + " level=" + std::to_string(r.level) + ": " + e.what());
    }
    if (std::isfinite(r.riccati) && std::isfinite(r.mc)) r.gap = r.mc - r.riccati;
    rows.push_back(std::move(r));
  };

  for (double a : alphas) {
    for (double rho : rhos) {
      const std::string reg = regime_name(a);
      const ModelParams p = params_for(c, a, rho, T);
      const double pref = std::pow(p.w0(), p.gamma()) / p.gamma();
      const double cexp = p.c_exponent();

      if (!p.regime().is_rough()) {
        // limit (exact kernel) row: Euler or classical nu against the limiting Riccati
        run_row({reg, a, rho, -1, 0}, [&](Row& r) {
          if (rho == 0.0) r.riccati = value_function(p, solve_riccati_limit(p, T, c.h), p.w0(), p.z0()).value;
          else r.status = "mc_only";
          McEstimate est;
          if (p.regime().is_classical()) {
            if (rho != 0.0) throw RegimeError("classical rows need rho = 0");
            const auto path = [&](std::uint64_t id, double* out) {
              const auto z = simulate_cir(p, grid, RngSpec{mc.seed, id});
              double s = 0.0;
              for (std::size_t k = 0; k < grid.steps(); ++k) s += p.v0() + z[k];
              out[0] = std::exp(p.gamma() * p.r() * T + p.eta() * s * grid.h());
            };
            est = summarize(run_paths(mc.n_paths, 1, mc.threads, path), mc.seed, "feynman_kac[classical]");
          } else {
            est = mc_feynman_kac(p, FractionalEuler{a}, grid, mc);
          }
          r.mc = pref * std::pow(est.mean, cexp);
          r.se = std::abs(pref) * cexp * std::pow(est.mean, cexp - 1.0) * est.std_error;
        });
      }
      if (p.regime().is_classical()) continue;
      for (int L : c.levels) {
        run_row({reg, a, rho, L, 0}, [&](Row& r) {
          const auto qm = measure_for(c, a, L);
          r.atoms = qm->size();
          if (p.regime().is_fractional()) {
            if (rho == 0.0) r.riccati = value_function(p, solve_riccati_finite(*qm, p, T, c.h), p.w0(), p.z0()).value;
            else r.status = "mc_only";
            const auto est = mc_feynman_kac(p, QuantizedFractional{qm}, grid, mc);
            r.mc = pref * std::pow(est.mean, cexp);
            r.se = std::abs(pref) * cexp * std::pow(est.mean, cexp - 1.0) * est.std_error;
          } else {
            if (rho != 0.0) throw RegimeError("rough rows need rho = 0");
            r.riccati = value_function(p, solve_riccati_rough(*qm, p, T, c.h), p.w0(), p.z0()).value;
            const auto est = mc_value_rough(p, *qm, c.positivity, grid, mc);
            r.mc = est.mean;
            r.se = est.std_error;
          }
        });
      }
    }
  }

  ctx.write_file("value.csv", [&](std::ostream& os) {
    csv::Writer w(os);
    w.header({"regime", "alpha", "rho", "level", "atoms", "riccati_value", "mc_value", "se", "gap", "status"});
    for (const auto& r : rows) {
      w.field(r.regime).field(r.alpha).field(r.rho);
      if (r.level < 0) w.field("limit");
      else w.field(r.level);
      w.field(r.atoms).field(r.riccati).field(r.mc).field(r.se).field(r.gap).field(r.status);
      w.end_row();
    }
  });
}

void cmd_wealth(Context& ctx) {
  const auto& c = ctx.cfg;
  if (c.model.rho != 0.0 || (c.rhos && (c.rhos->size() != 1 || c.rhos->front() != 0.0))) {
    throw ArgumentError("wealth: the optimal-wealth experiment requires rho = 0");
  }
  const auto alphas = c.alphas ? *c.alphas : std::vector<double>{0.5, 0.95, -0.75, -0.55, 0.0};
  const double T = horizon_of(c, c.model.horizon);
  const TimeGrid grid(T, c.h);
  const std::size_t n_stat = paths_or(c, 2000);

  struct Summary {
    double alpha;
    std::string regime;
    double pi;
    McEstimate mean_w;
    double var_w, var_se;
  };
  std::vector<Summary> summary;

  for (double a : alphas) {
    try {
      const ModelParams p = params_for(c, a, 0.0, T);
      const auto scheme = scheme_for(c, a);
      const double pi_star = optimal_strategy(p, StrategyState{});
      const Strategy pi = make_strategy(MertonRatio{}, p);
      const auto one = [&](std::uint64_t id) {
        const auto bp = brownian_pair(grid, 0.0, RngSpec{c.seed, id});
        const auto z = simulate_cir(p, grid, bp.dBz);
        const auto vol = volatility(c, scheme, z, grid, c.positivity);
        return simulate_wealth(p, grid, pi, vol.used, z, bp.dBs);
      };
      std::vector<std::vector<double>> sample;
      for (std::size_t i = 0; i < c.sample_paths; ++i) sample.push_back(one(i));
      ctx.write_file("wealth_alpha=" + tag(a) + ".csv", [&](std::ostream& os) {
        csv::Writer w(os);
        w.field("t").field("pi");
        for (std::size_t i = 0; i < sample.size(); ++i) w.field("W" + std::to_string(i));
        w.end_row();
        for (std::size_t k = 0; k < grid.points(); ++k) {
          w.field(grid.t(k)).field(pi_star);
          for (const auto& s : sample) w.field(s[k]);
          w.end_row();
        }
      });
      const auto table = run_paths(n_stat, 1, c.threads, [&](std::uint64_t id, double* out) { out[0] = one(id).back(); });
      const McEstimate m = summarize(table, c.seed, "terminal_wealth");
      // variance and its standard error from the second and fourth central moments
      double m2 = 0.0, m4 = 0.0;
      for (double v : table) {
        const double d = v - m.mean;
        m2 += d * d;
        m4 += d * d * d * d;
      }
      const double n = static_cast<double>(table.size());
      const double var = m2 / (n - 1.0);
      const double var_se = std::sqrt(std::max(m4 / n - (m2 / n) * (m2 / n), 0.0) / n);
      summary.push_back({a, regime_name(a), pi_star, m, var, var_se});
    } catch (const IoError&) {
      throw;
    } catch (const std::exception& e) {
      ctx.fail_row("wealth alpha=" + tag(a) + ": " + e.what());
    }
  }
  ctx.write_file("wealth_summary.csv", [&](std::ostream& os) {
    csv::Writer w(os);
    w.header({"alpha", "regime", "n_paths", "pi_star", "mean_WT", "mean_se", "var_WT", "var_se"});
    for (const auto& s : summary) {
      w.field(s.alpha).field(s.regime).field(s.mean_w.n_paths).field(s.pi).field(s.mean_w.mean).field(s.mean_w.std_error);
      w.field(s.var_w).field(s.var_se);
      w.end_row();
    }
  });
}

void cmd_longterm(Context& ctx) {
  const auto& c = ctx.cfg;
  const auto alphas = c.alphas ? *c.alphas : std::vector<double>{0.75, -0.75};
  const double T = horizon_of(c, 10.0);
  const TimeGrid grid(T, c.h);
  const std::size_t n = paths_or(c, 100);
  const std::size_t n_check = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(T)));
  std::vector<std::size_t> checkpoints;
  for (std::size_t j = 1; j <= n_check; ++j) {
    checkpoints.push_back(static_cast<std::size_t>(std::llround(static_cast<double>(j) / static_cast<double>(n_check) *
                                                                 static_cast<double>(grid.steps()))));
  }

  struct Row {
    std::string regime;
    double alpha, t;
    std::string quantity;
    std::vector<double> values;
  };
  std::vector<Row> rows;
  for (double a : alphas) {
    try {
      const ModelParams p = params_for(c, a, 0.0, T);
      const auto scheme = scheme_for(c, a);
      const std::size_t m = checkpoints.size();
      const auto table = run_paths(n, 2 * m, c.threads, [&](std::uint64_t id, double* out) {
        const auto bp = brownian_pair(grid, 0.0, RngSpec{c.seed, id});
        const auto z = simulate_cir(p, grid, bp.dBz);
        const auto vol = volatility(c, scheme, z, grid, c.positivity);
        const auto s = simulate_stock(p, grid, vol.used, bp.dBs, c.s0);
        for (std::size_t j = 0; j < m; ++j) {
          out[j] = vol.raw[checkpoints[j]];
          out[m + j] = s[checkpoints[j]];
        }
      });
      for (std::size_t j = 0; j < m; ++j) {
        rows.push_back({regime_name(a), a, grid.t(checkpoints[j]), "nu", column(table, 2 * m, j)});
        rows.push_back({regime_name(a), a, grid.t(checkpoints[j]), "S", column(table, 2 * m, m + j)});
      }
    } catch (const std::exception& e) {
      ctx.fail_row("longterm alpha=" + tag(a) + ": " + e.what());
    }
  }
  ctx.write_file("longterm.csv", [&](std::ostream& os) {
    csv::Writer w(os);
    w.header({"regime", "alpha", "t", "quantity", "n_paths", "mean", "q05", "q25", "q50", "q75", "q95"});
    for (auto& r : rows) {
      double s = 0.0;
      for (double v : r.values) s += v;
      std::sort(r.values.begin(), r.values.end());
      w.field(r.regime).field(r.alpha).field(r.t).field(r.quantity).field(r.values.size());
      w.field(s / static_cast<double>(r.values.size()));
      for (double q : {0.05, 0.25, 0.5, 0.75, 0.95}) w.field(quantile(r.values, q));
      w.end_row();
    }
  });
}

void cmd_converge(Context& ctx) {
  const auto& c = ctx.cfg;
  const double T = horizon_of(c, c.model.horizon);
  const TimeGrid grid(T, c.h);
  const ModelParams p = params_for(c, c.model.alpha, 0.0, T);
  if (c.model.rho != 0.0) throw ArgumentError("converge: requires rho = 0");
  const auto report = convergence_study(p, c.levels, grid, mc_config(c, 1000), c.base_atoms);
  for (const auto& r : report.rows) {
    if (r.functional == "nu_monotone" && r.violations > 0) {
      ctx.fail_row("converge level=" + std::to_string(r.level) + ": " + std::to_string(r.violations) +
                   " monotonicity violations");
    }
  }
  ctx.write_file("converge.csv", [&](std::ostream& os) { write_csv(os, report); });
}

}  // namespace frh::cli
