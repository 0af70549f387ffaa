#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "frheston/core.hpp"
#include "frheston/quantize.hpp"
#include "frheston/riccati.hpp"

using namespace frh;

namespace {

ModelParams params(double alpha, double gamma = -2.0, double lambda = 0.5) {
  ModelInputs in;
  in.alpha = alpha;
  in.gamma = gamma;
  in.lambda = lambda;
  return ModelParams(in);
}

QuantizedMeasure mu_measure(std::size_t n, int levels, double alpha) {
  return dyadic_chain(n, levels, alpha, MeasureKind::Mu).back();
}

QuantizedMeasure mu_tilde_measure(std::size_t n, int levels, double alpha) {
  return dyadic_chain(n, levels, alpha, MeasureKind::MuTilde).back();
}

// y' = a y^2 + b y + c, y(0) = 0
double riccati_closed_form(double tau, double a, double b, double c) {
  const double d = std::sqrt(b * b - 4.0 * a * c);
  const double e = std::expm1(d * tau);
  return 2.0 * c * e / ((d - b) * e + 2.0 * d);
}

double observed_order(double coarse, double mid, double fine) {
  return std::log2(std::abs(coarse - mid) / std::abs(mid - fine));
}

}  // namespace

TEST(Psi, ClosedFormMatchesRungeKutta) {
  const double tau = 0.3, q = 2.0, x = 4.0, eta = -1.0 / 12.0;
  // psi' = eta q - x psi
  const int n = 3000;
  const double h = tau / n;
  double y = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto f = [&](double v) { return eta * q - x * v; };
    const double k1 = f(y), k2 = f(y + 0.5 * h * k1), k3 = f(y + 0.5 * h * k2), k4 = f(y + h * k3);
    y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  EXPECT_NEAR(psi(tau, q, x, eta), y, 1e-8);
  EXPECT_EQ(psi(0.0, q, x, eta), 0.0);
  EXPECT_THROW(psi(tau, q, 0.0, eta), DomainError);
  EXPECT_THROW(psi(-0.1, q, x, eta), DomainError);
}

TEST(Psi, VectorFollowsAtoms) {
  const auto qm = mu_measure(8, 1, 0.75);
  const auto v = psi_vector(0.4, qm, -0.1);
  ASSERT_EQ(v.size(), qm.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    EXPECT_DOUBLE_EQ(v[i], psi(0.4, qm.weights[i], qm.nodes[i], -0.1));
    EXPECT_LT(v[i], 0.0);
  }
}

TEST(RiccatiFinite, ZeroRiskPremiumGivesBondExponent) {
  const auto p = params(0.75, -2.0, 0.0);
  ASSERT_EQ(p.eta(), 0.0);
  const auto sol = solve_riccati_finite(mu_measure(16, 2, 0.75), p, 1.0, 0.01);
  ASSERT_FALSE(sol.blow_up);
  for (std::size_t k = 0; k < sol.tau.size(); ++k) {
    EXPECT_EQ(sol.varphi[k], 0.0);
    EXPECT_NEAR(sol.phi_big[k], p.gamma() * p.r() * sol.tau[k], 1e-14);
  }
  const auto lim = solve_riccati_limit(p, 1.0, 0.01);
  EXPECT_EQ(lim.terminal_varphi(), 0.0);
  EXPECT_NEAR(lim.terminal_phi_big(), p.gamma() * p.r(), 1e-14);
}

TEST(RiccatiFinite, NegativeGammaKeepsVarphiNonPositive) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> g(-6.0, -0.1), a(0.1, 0.9), l(0.05, 1.5), k(1.0, 8.0);
  for (int trial = 0; trial < 20; ++trial) {
    ModelInputs in;
    in.gamma = g(rng);
    in.alpha = a(rng);
    in.lambda = l(rng);
    in.kappa = k(rng);
    in.sigma = std::sqrt(2.0 * in.kappa * in.theta) * 0.9;
    const ModelParams p(in);
    ASSERT_LT(p.eta(), 0.0);
    const auto sol = solve_riccati_finite(mu_measure(16, 1, in.alpha), p, 1.0, 0.01);
    ASSERT_FALSE(sol.blow_up);
    for (double v : sol.varphi) EXPECT_LE(v, 0.0);
  }
}

TEST(RiccatiFinite, ComparisonOrderingAcrossLevels) {
  const double alpha = 0.75;
  const auto p = params(alpha);
  const auto chain = dyadic_chain(16, 4, alpha, MeasureKind::Mu);
  const auto lim = solve_riccati_limit(p, 1.0, 0.005);
  std::vector<RiccatiSolution> sols;
  for (const auto& qm : chain) sols.push_back(solve_riccati_finite(qm, p, 1.0, 0.005));
  // eta < 0 and a larger kernel give a smaller varphi at every tau
  for (std::size_t L = 0; L + 1 < sols.size(); ++L) {
    for (std::size_t k = 1; k < sols[L].tau.size(); ++k) {
      EXPECT_LE(sols[L + 1].varphi[k], sols[L].varphi[k] + 1e-13);
      EXPECT_LE(lim.varphi[k], sols[L + 1].varphi[k] + 1e-13);
    }
  }
  // and the gap to the limit shrinks
  double prev = 1e100;
  for (const auto& s : sols) {
    const double gap = std::abs(s.terminal_varphi() - lim.terminal_varphi());
    EXPECT_LT(gap, prev);
    prev = gap;
  }
}

TEST(RiccatiFinite, FourthOrderUnderStepHalving) {
  const auto p = params(0.75);
  const auto qm = mu_measure(4, 0, 0.75);
  std::vector<double> vp, pb;
  for (double h : {0.05, 0.025, 0.0125}) {
    const auto s = solve_riccati_finite(qm, p, 1.0, h);
    vp.push_back(s.terminal_varphi());
    pb.push_back(s.terminal_phi_big());
  }
  EXPECT_GE(observed_order(vp[0], vp[1], vp[2]), 3.5);
  EXPECT_GE(observed_order(pb[0], pb[1], pb[2]), 3.5);
}

TEST(RiccatiFinite, RejectsWrongInputs) {
  EXPECT_THROW(solve_riccati_finite(mu_measure(8, 0, 0.75), params(0.75).with_rho(-0.3), 1.0, 0.01), RegimeError);
  EXPECT_THROW(solve_riccati_finite(mu_tilde_measure(8, 0, -0.75), params(0.75), 1.0, 0.01), RegimeError);
  EXPECT_THROW(solve_riccati_limit(params(-0.75), 1.0, 0.01), RegimeError);
  EXPECT_THROW(solve_riccati_rough(mu_tilde_measure(8, 0, -0.75), params(0.75), 1.0, 0.01), RegimeError);
  EXPECT_THROW(solve_riccati_rough(mu_measure(8, 0, 0.75), params(-0.75), 1.0, 0.01), RegimeError);
}

TEST(RiccatiLimit, ClassicalClosedForm) {
  const auto p = params(0.0);
  ASSERT_TRUE(p.regime().is_classical());
  const auto sol = solve_riccati_limit(p, 1.0, 0.001);
  const double a = 0.5 * p.sigma() * p.sigma(), b = -p.kappa(), c = p.eta();
  for (std::size_t k = 0; k < sol.tau.size(); ++k)
    EXPECT_NEAR(sol.varphi[k], riccati_closed_form(sol.tau[k], a, b, c), 1e-12);
  const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double s) { return riccati_closed_form(s, a, b, c); }, 0.0, 1.0, 10, 1e-14);
  const double expected = (p.gamma() * p.r() + p.v0() * p.eta()) + p.kappa() * p.theta() * integral;
  EXPECT_NEAR(sol.terminal_phi_big(), expected, 1e-12);
}

TEST(RiccatiLimit, ApproachesClassicalAsAlphaVanishes) {
  const auto cl = solve_riccati_limit(params(0.0), 1.0, 0.01).terminal_varphi();
  double prev = 1e100;
  for (double alpha : {0.1, 0.01, 0.001}) {
    const double d = std::abs(solve_riccati_limit(params(alpha), 1.0, 0.01).terminal_varphi() - cl);
    EXPECT_LT(d, prev);
    prev = d;
  }
  EXPECT_LT(prev, 1e-3 * std::abs(cl));
}

TEST(RiccatiLimit, BlowUpIsDetected) {
  // eta = 200 and kappa^2 < 2 sigma^2 eta: the classical solution explodes before tau = 1
  const auto p = params(0.0, 0.5, 20.0);
  const auto sol = solve_riccati_limit(p, 1.0, 0.001);
  ASSERT_TRUE(sol.blow_up.has_value());
  EXPECT_GT(*sol.blow_up, 0.0);
  EXPECT_LT(*sol.blow_up, 1.0);
  EXPECT_FALSE(sol.reaches(1.0));
  EXPECT_TRUE(sol.reaches(sol.tau.back()));
  EXPECT_THROW(sol.terminal_varphi(), BlowUpError);
  EXPECT_THROW(sol.varphi_at(1.0), BlowUpError);
  EXPECT_THROW(value_function(p, sol, 1.0, 0.05), BlowUpError);
  for (double v : sol.varphi) EXPECT_TRUE(std::isfinite(v));
}

TEST(RiccatiSolution, InterpolatesBetweenGridPoints) {
  const auto sol = solve_riccati_limit(params(0.75), 1.0, 0.1);
  EXPECT_DOUBLE_EQ(sol.varphi_at(0.3), sol.varphi[3]);
  EXPECT_NEAR(sol.varphi_at(0.35), 0.5 * (sol.varphi[3] + sol.varphi[4]), 1e-15);
  EXPECT_THROW(sol.varphi_at(-0.1), DomainError);
  EXPECT_THROW(sol.phi_big_at(1.5), BlowUpError);
}

TEST(RoughH, VanishesAtBothEnds) {
  const auto qm = mu_tilde_measure(16, 0, -0.75);
  EXPECT_EQ(rough_h(0.0, 1.0, qm), 0.0);
  EXPECT_EQ(rough_h(1.0, 1.0, qm), 0.0);
  EXPECT_GT(rough_h(0.5, 1.0, qm), 0.0);
  EXPECT_THROW(rough_h(1.1, 1.0, qm), DomainError);
}

TEST(RoughH, MatchesDoubleIntegralOfKernel) {
  // h(t) = int_0^t int_0^{T-t} K_n(a + b) db da
  const auto qm = mu_tilde_measure(16, 0, -0.75);
  const double T = 1.0;
  for (double t : {0.5, 0.2, 0.9}) {
    using gk = boost::math::quadrature::gauss_kronrod<double, 31>;
    const auto inner = [&](double a) {
      return gk::integrate([&](double b) { return approx_kernel(a + b, qm); }, 0.0, T - t, 15, 1e-13);
    };
    const double ref = gk::integrate(inner, 0.0, t, 15, 1e-12);
    EXPECT_NEAR(rough_h(t, T, qm), ref, 1e-6) << "t = " << t;
  }
}

TEST(RiccatiRough, ConvergesUnderStepHalving) {
  const auto p = params(-0.75);
  const auto qm = mu_tilde_measure(16, 0, -0.75);
  std::vector<double> vp;
  for (double h : {0.02, 0.01, 0.005}) vp.push_back(solve_riccati_rough(qm, p, 1.0, h).terminal_varphi());
  EXPECT_GE(observed_order(vp[0], vp[1], vp[2]), 1.5);
}

TEST(RiccatiRough, ZeroRiskPremiumGivesBondExponent) {
  const auto p = params(-0.75, -2.0, 0.0);
  const auto sol = solve_riccati_rough(mu_tilde_measure(16, 1, -0.75), p, 1.0, 0.01);
  for (std::size_t k = 0; k < sol.tau.size(); ++k) {
    EXPECT_EQ(sol.varphi[k], 0.0);
    EXPECT_NEAR(sol.phi_big[k], p.gamma() * p.r() * sol.tau[k], 1e-14);
  }
}

TEST(ValueFunction, ReassemblesAndHasSignOfGamma) {
  const auto qm = mu_measure(16, 2, 0.75);
  for (double gamma : {-2.0, 0.5}) {
    const auto p = params(0.75, gamma);
    const auto sol = solve_riccati_finite(qm, p, 1.0, 0.01);
    const auto v = value_function(p, sol, 1000.0, 0.05);
    EXPECT_NEAR(v.value, v.prefactor * std::exp(v.phi_big + v.varphi_z + v.psi_y + v.history),
                1e-12 * std::abs(v.value));
    EXPECT_DOUBLE_EQ(v.prefactor, std::pow(1000.0, gamma) / gamma);
    EXPECT_EQ(std::signbit(v.value), gamma < 0.0);
  }
  EXPECT_THROW(value_function(params(0.75), solve_riccati_finite(qm, params(0.75), 1.0, 0.01), 0.0, 0.05),
               ArgumentError);
}

TEST(ValueFunction, AtHorizonIsTerminalUtility) {
  const auto p = params(0.75);
  const auto qm = mu_measure(16, 1, 0.75);
  const auto sol = solve_riccati_finite(qm, p, 1.0, 0.01);
  std::vector<double> y(qm.size(), 0.3);
  const auto v = value_function_at_t(p, sol, 1.0, 2.0, y, 0.07);
  EXPECT_DOUBLE_EQ(v.value, std::pow(2.0, p.gamma()) / p.gamma());
}

TEST(ValueFunction, ZeroFactorsMatchInitialValue) {
  const auto p = params(0.75);
  const auto qm = mu_measure(16, 1, 0.75);
  const auto sol = solve_riccati_finite(qm, p, 1.0, 0.01);
  const auto v0 = value_function(p, sol, 1000.0, 0.05);
  const auto vt = value_function_at_t(p, sol, 0.0, 1000.0, std::vector<double>(qm.size(), 0.0), 0.05);
  EXPECT_DOUBLE_EQ(v0.value, vt.value);
  // positive factor states lower the exponent since psi < 0
  const auto vy = value_function_at_t(p, sol, 0.5, 1000.0, std::vector<double>(qm.size(), 0.1), 0.05);
  EXPECT_LT(vy.psi_y, 0.0);
  EXPECT_THROW(value_function_at_t(p, sol, 0.5, 1000.0, std::vector<double>(3, 0.0), 0.05), ArgumentError);
  EXPECT_THROW(value_function_at_t(p, sol, 1.5, 1000.0, {}, 0.05), ArgumentError);
}

TEST(ValueFunction, LimitAddsHistory) {
  const auto p = params(0.75);
  const auto sol = solve_riccati_limit(p, 1.0, 0.01);
  const auto a = value_function_limit_at_t(p, sol, 0.5, 1000.0, 0.05, 0.0);
  const auto b = value_function_limit_at_t(p, sol, 0.5, 1000.0, 0.05, -0.01);
  EXPECT_EQ(b.history, -0.01);
  EXPECT_NEAR(b.value / a.value, std::exp(-0.01), 1e-14);
  EXPECT_THROW(value_function_limit_at_t(p, solve_riccati_finite(mu_measure(8, 0, 0.75), p, 1.0, 0.01), 0.5, 1000.0,
                                         0.05, 0.0),
               RegimeError);
}

TEST(HistoryTerm, VanishesAtStart) {
  EXPECT_EQ(history_term({0.05}, 0.0, 1.0, 0.75, -0.1), 0.0);
  EXPECT_EQ(history_term_quadrature({0.05}, 0.0, 1.0, 0.75, -0.1), 0.0);
  EXPECT_THROW(history_term({0.05}, 0.5, 1.0, 0.75, -0.1), ArgumentError);
  EXPECT_THROW(history_term({0.05, 0.05}, 1.0, 1.0, 0.75, -0.1), ArgumentError);
  EXPECT_THROW(history_term({0.05, 0.05}, 0.5, 1.0, -0.75, -0.1), RegimeError);
}

TEST(HistoryTerm, ConstantPathClosedForm) {
  const double alpha = 0.6, T = 1.0, t = 0.4, eta = -0.2, z = 0.05;
  const std::vector<double> zs(9, z);
  const double expected =
      eta * z * (std::pow(T, alpha + 1) - std::pow(T - t, alpha + 1) - std::pow(t, alpha + 1)) / std::tgamma(alpha + 2);
  EXPECT_NEAR(history_term(zs, t, T, alpha, eta), expected, 1e-14);
}

TEST(HistoryTerm, MatchesKernelQuadrature) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 0.2);
  for (double alpha : {0.3, 0.75}) {
    std::vector<double> zs(21);
    for (auto& z : zs) z = u(rng);
    const double a = history_term(zs, 0.6, 1.0, alpha, -0.1);
    const double b = history_term_quadrature(zs, 0.6, 1.0, alpha, -0.1);
    EXPECT_NEAR(a, b, 1e-8 * std::abs(a)) << "alpha = " << alpha;
  }
}

TEST(HistoryTerm, LowerBoundForPositiveGamma) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 0.3), tt(0.05, 0.95), a(0.05, 0.95), g(0.05, 0.95);
  for (int trial = 0; trial < 50; ++trial) {
    ModelInputs in;
    in.gamma = g(rng);
    const ModelParams p(in);
    ASSERT_GT(p.eta(), 0.0);
    std::vector<double> zs(1 + trial % 7 + 3);
    for (auto& z : zs) z = u(rng);
    const double alpha = a(rng), t = tt(rng);
    EXPECT_GE(history_term(zs, t, 1.0, alpha, p.eta()), history_lower_bound(zs, t, 1.0, alpha, p.eta()) - 1e-15);
  }
}

TEST(Strategy, MertonRatioWhenUncorrelated) {
  const auto p = params(0.75);
  EXPECT_NEAR(optimal_strategy(p, {}), 1.0 / 6.0, 1e-15);
  for (double z : {0.0, 0.05, 0.3})
    for (double t : {0.0, 0.5})
      EXPECT_EQ(optimal_strategy(p, {t, z, 0.02, std::nullopt}), optimal_strategy(p, {}));
}

TEST(Strategy, CorrelationNeedsGradient) {
  const auto p = params(0.75).with_rho(-0.5);
  EXPECT_THROW(optimal_strategy(p, {0.0, 0.05, 0.04, std::nullopt}), ArgumentError);
  const double g = 0.8;
  const double expected = p.merton_ratio() + p.c_exponent() * p.sigma() * p.rho() / (1.0 - p.gamma()) *
                                                 std::sqrt(0.05 / 0.04) * g;
  EXPECT_NEAR(optimal_strategy(p, {0.0, 0.05, 0.04, g}), expected, 1e-15);
  EXPECT_THROW(optimal_strategy(p, {0.0, 0.05, 0.0, g}), DomainError);
}
