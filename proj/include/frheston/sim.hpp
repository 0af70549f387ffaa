#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "frheston/core.hpp"
#include "frheston/quantize.hpp"

namespace frh {

// Uniform grid t_k = k h, k = 0..steps, with steps h = T.
class TimeGrid {
 public:
  // Throws unless horizon / h is an integer to within 1e-12.
  TimeGrid(double horizon, double h);
  static TimeGrid from_steps(double horizon, std::size_t steps);

  double h() const { return h_; }
  std::size_t steps() const { return steps_; }
  std::size_t points() const { return steps_ + 1; }
  double horizon() const { return static_cast<double>(steps_) * h_; }
  double t(std::size_t k) const { return static_cast<double>(k) * h_; }

 private:
  TimeGrid(double h, std::size_t steps, int) : h_(h), steps_(steps) {}
  double h_;
  std::size_t steps_;
};

struct RngSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;
};

// Independent noise channels of one path.
enum class Channel : std::uint32_t { BrownianZ = 0, BrownianPerp = 1, Aux = 2 };

// Standard normal draws from a Mersenne twister keyed by (master_seed, stream_id, channel).
class NormalStream {
 public:
  NormalStream(const RngSpec& spec, Channel channel);
  double operator()() { return dist_(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> dist_;
};

// `steps` increments N(0, h).
std::vector<double> brownian_increments(const TimeGrid& grid, const RngSpec& spec, Channel channel);

struct BrownianPair {
  std::vector<double> dBz;
  std::vector<double> dBs;
};

// dBs = rho dBz + sqrt(1 - rho^2) dB_perp
BrownianPair brownian_pair(const TimeGrid& grid, double rho, const RngSpec& spec);
std::vector<double> correlate(const std::vector<double>& dBz, const std::vector<double>& dBperp, double rho);

// Full-truncation Euler; returns Z_k^+ for k = 0..steps.
std::vector<double> simulate_cir(const ModelParams& p, const TimeGrid& grid, const std::vector<double>& dBz);
std::vector<double> simulate_cir(const ModelParams& p, const TimeGrid& grid, const RngSpec& spec);

// Exact transition sampling (scaled noncentral chi-square). Validation oracle.
std::vector<double> simulate_cir_exact(const ModelParams& p, const TimeGrid& grid, const RngSpec& spec);

// Exponential integrator for dY = (Z - x Y) dt with Z frozen over each step.
class FactorIntegrator {
 public:
  FactorIntegrator(const std::vector<double>& nodes, double h);
  std::size_t size() const { return decay_.size(); }
  // y <- e^{-x h} y + z (1 - e^{-x h}) / x
  void step(std::vector<double>& y, double z) const;
  // Same with Z linear between z0 and z1 over the step.
  void step_linear(std::vector<double>& y, double z0, double z1) const;
  // sum_i q_i y_i
  static double weighted_sum(const std::vector<double>& q, const std::vector<double>& y);

 private:
  std::vector<double> decay_;
  std::vector<double> gain_;
  std::vector<double> gain_left_;  // weight of z0 in step_linear; z1 gets gain_ - gain_left_
};

// Y factors [atoms x (steps+1)], Y_0 = 0.
Eigen::MatrixXd simulate_factors(const QuantizedMeasure& qm, const std::vector<double>& z, const TimeGrid& grid);

// Rough factors Ytilde_k = Z_k J(t_k) - I_k with J(t) = (1 - e^{-x t}) / x, [atoms x (steps+1)].
// I_k integrates Z linearly interpolated between grid points, which keeps sum_i q_i Ytilde_i bounded
// as atoms with x >> 1/h are added.
Eigen::MatrixXd simulate_factors_rough(const QuantizedMeasure& qm, const std::vector<double>& z, const TimeGrid& grid);

struct TildeZPath {
  std::vector<double> z;
  std::vector<double> nu;  // v0 + sum q_i Y_i along the path
};

// Drift-modified CIR with extra drift lambda gamma sigma rho / (1 - gamma) sqrt(Z nu).
// Identical to simulate_cir on the same increments when rho = 0.
TildeZPath simulate_tilde_z(const ModelParams& p, const QuantizedMeasure& qm, const TimeGrid& grid,
                            const std::vector<double>& dBz);
TildeZPath simulate_tilde_z(const ModelParams& p, const QuantizedMeasure& qm, const TimeGrid& grid,
                            const RngSpec& spec);
// Same, with nu from the direct fractional Euler convolution.
TildeZPath simulate_tilde_z_euler(const ModelParams& p, const TimeGrid& grid, const std::vector<double>& dBz);

struct MarketState {
  std::size_t step;
  double t;
  double wealth;
  double z;
  double nu;
};

using Strategy = std::function<double(const MarketState&)>;

// W_{k+1} = W_k exp[(r + pi nu (lambda - pi/2)) h + pi sqrt(nu) dBs]. `z` may be empty.
std::vector<double> simulate_wealth(const ModelParams& p, const TimeGrid& grid, const Strategy& pi,
                                    const std::vector<double>& nu, const std::vector<double>& z,
                                    const std::vector<double>& dBs);

// S_{k+1} = S_k exp[(r + lambda nu - nu/2) h + sqrt(nu) dBs]
std::vector<double> simulate_stock(const ModelParams& p, const TimeGrid& grid, const std::vector<double>& nu,
                                   const std::vector<double>& dBs, double s0);

struct PathBundle {
  TimeGrid grid;
  std::vector<double> z;
  Eigen::MatrixXd factors;
  std::vector<double> nu;
  std::vector<double> s;
  std::vector<double> w;
  RngSpec rng;
  std::string scheme;
};

// Columns t, Z, nu, S, W and optionally y0..y{n-1}. Empty series are written as empty fields.
void write_csv(std::ostream& os, const PathBundle& b, bool with_factors);

}  // namespace frh
