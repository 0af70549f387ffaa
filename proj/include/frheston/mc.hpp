#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "frheston/core.hpp"
#include "frheston/quantize.hpp"
#include "frheston/riccati.hpp"
#include "frheston/sim.hpp"
#include "frheston/vol.hpp"

namespace frh {

struct McConfig {
  std::size_t n_paths = 10000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
  std::string functional;
};

// Neumaier-compensated mean and standard error (sample std / sqrt(n)) of `samples`.
McEstimate summarize(const std::vector<double>& samples, std::uint64_t seed, std::string functional);

// Evaluates `path(stream_id, out)` for stream_id = 0..n_paths-1, each writing `width` values,
// on `threads` workers. Returns the row-major [n_paths x width] table. Row contents depend only on
// stream_id, so the table is identical for any thread count.
std::vector<double> run_paths(std::size_t n_paths, std::size_t width, unsigned threads,
                              const std::function<void(std::uint64_t, double*)>& path);

// Column `col` of a run_paths table.
std::vector<double> column(const std::vector<double>& table, std::size_t width, std::size_t col);

struct ConstantStrategy {
  double pi;
};
struct MertonRatio {};
// Optimal strategy with a supplied g_z / g source (state -> ratio).
struct AffineCorrection {
  std::function<double(const MarketState&)> gradient_ratio;
};

using StrategySpec = std::variant<ConstantStrategy, MertonRatio, AffineCorrection>;

std::string describe(const StrategySpec& s);
Strategy make_strategy(const StrategySpec& s, const ModelParams& p);

// E[exp int_0^T (gamma r / c + eta nu~_s / c) ds], left-endpoint in time. rho != 0 drives the
// volatility by Z~; this needs a fractional scheme. Rough schemes apply `pos` to nu.
McEstimate mc_feynman_kac(const ModelParams& p, const VolScheme& scheme, const TimeGrid& grid, const McConfig& cfg,
                          PositivityMap pos = PositivityMap::Identity);

// Same functional for nu~ on (t, T] given the state at t: Z_t = z, factor states y (quantized
// scheme). The history is carried by y; fresh increments come from `cfg.seed`.
McEstimate mc_feynman_kac_from(const ModelParams& p, const QuantizedMeasure& qm, double t, double z,
                               const std::vector<double>& y, const TimeGrid& grid, const McConfig& cfg);

// g and g_z / g at t = 0 for the current z0, by common random numbers and a central difference
// in z0 with relative bump `bump`.
struct GradientEstimate {
  double g = 0.0;
  double g_z = 0.0;
  double ratio = 0.0;
};
GradientEstimate estimate_gradient_ratio(const ModelParams& p, const VolScheme& scheme, const TimeGrid& grid,
                                         const McConfig& cfg, double bump = 1e-3);

// E[(1/gamma) W_T^gamma] under the strategy; rough schemes feed a = pos(nu) into the wealth.
McEstimate mc_utility(const ModelParams& p, const StrategySpec& strategy, const VolScheme& scheme, PositivityMap pos,
                      const TimeGrid& grid, const McConfig& cfg);

// Utilities of several strategies on common random numbers.
std::vector<McEstimate> mc_utility_crn(const ModelParams& p, const std::vector<StrategySpec>& strategies,
                                       const VolScheme& scheme, PositivityMap pos, const TimeGrid& grid,
                                       const McConfig& cfg);

// (1/gamma) w0^gamma E[exp int (gamma r + eta a(nu_s)) ds] for the quantized rough nu.
McEstimate mc_value_rough(const ModelParams& p, const QuantizedMeasure& qm_tilde, PositivityMap pos,
                          const TimeGrid& grid, const McConfig& cfg);

// Count of grid points with nu < 0 for the quantized rough nu over the paths of `cfg`.
std::size_t count_negative_rough(const ModelParams& p, const QuantizedMeasure& qm_tilde, const TimeGrid& grid,
                                 const McConfig& cfg);

struct ConvergenceRow {
  std::string functional;
  int level = 0;
  std::size_t atoms = 0;
  std::size_t n_paths = 0;
  double mean = 0.0;
  double std_error = 0.0;
  double gap = 0.0;      // |mean(level) - mean(level+1)|, NaN on the last level
  double epsilon = 0.0;  // epsilon certificate, NaN where it is not defined
  std::size_t violations = 0;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
};

// Rows per level L of the dyadic chain started at make_partition(base_atoms):
//   "kernel"    approx_kernel(1, mu^L) against t^{alpha-1}/Gamma(alpha)
//   "nu_monotone" pathwise violations of nu^L <= nu^{L+1} on shared paths
//   "riccati_value" finite-dimensional affine value, gap to the next level, epsilon certificate
//   "mc_value"  Feynman-Kac value under the quantized scheme
ConvergenceReport convergence_study(const ModelParams& p, const std::vector<int>& levels, const TimeGrid& grid,
                                    const McConfig& cfg, std::size_t base_atoms = 16);

// Columns functional, level, n_paths, mean, std_error, gap, epsilon
void write_csv(std::ostream& os, const ConvergenceReport& r);

}  // namespace frh
