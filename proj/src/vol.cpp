#include "frheston/vol.hpp"

#include <cmath>
#include <sstream>

namespace frh {

const char* to_string(PositivityMap m) {
  switch (m) {
    case PositivityMap::Identity: return "identity";
    case PositivityMap::AbsoluteValue: return "abs";
    case PositivityMap::Exponential: return "exp";
  }
  return "unknown";
}

PositivityMap positivity_from_string(const std::string& s) {
  if (s == "identity") return PositivityMap::Identity;
  if (s == "abs") return PositivityMap::AbsoluteValue;
  if (s == "exp") return PositivityMap::Exponential;
  throw ArgumentError("unknown positivity map '" + s + "' (identity, abs, exp)");
}

double apply_positivity(double nu, PositivityMap m) {
  switch (m) {
    case PositivityMap::Identity:
      if (nu < 0.0) throw DomainError("identity positivity map applied to negative volatility");
      return nu;
    case PositivityMap::AbsoluteValue: return std::abs(nu);
    case PositivityMap::Exponential: return std::exp(nu);
  }
  return nu;
}

std::vector<double> apply_positivity(const std::vector<double>& nu, PositivityMap m) {
  std::vector<double> out(nu.size());
  for (std::size_t k = 0; k < nu.size(); ++k) out[k] = apply_positivity(nu[k], m);
  return out;
}

FractionalEulerKernel::FractionalEulerKernel(double alpha, const TimeGrid& grid)
    : alpha_(alpha), h_(grid.h()), w_(grid.steps() + 1, 0.0), cum_(grid.steps() + 1, 0.0) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw RegimeError("fractional Euler scheme needs alpha in (0,1)");
  const double g = gamma_fn(alpha + 1.0);
  const double ha = std::pow(h_, alpha);
  double prev = 0.0;
  for (std::size_t m = 1; m <= grid.steps(); ++m) {
    const double pm = std::pow(static_cast<double>(m), alpha);
    w_[m] = ha * (pm - prev) / g;
    cum_[m] = h_ * ha * pm / g;
    prev = pm;
  }
}

double FractionalEulerKernel::nu_at(const std::vector<double>& z, std::size_t k, double v0) const {
  double s = 0.0;
  for (std::size_t j = 0; j < k; ++j) s += w_[k - j] * z[j];
  return v0 + s;
}

std::vector<double> FractionalEulerKernel::nu(const std::vector<double>& z, double v0) const {
  if (z.size() != w_.size()) throw ArgumentError("fractional Euler: path length does not match grid");
  std::vector<double> out(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) out[k] = nu_at(z, k, v0);
  return out;
}

double FractionalEulerKernel::integrated(const std::vector<double>& z, double v0) const {
  if (z.size() != w_.size()) throw ArgumentError("fractional Euler: path length does not match grid");
  const std::size_t n = z.size() - 1;
  double s = 0.0;
  for (std::size_t j = 0; j + 1 < n; ++j) s += cum_[n - 1 - j] * z[j];
  return v0 * h_ * static_cast<double>(n) + s;
}

RoughMarchaudKernel::RoughMarchaudKernel(double alpha, double delta, const TimeGrid& grid)
    : alpha_(alpha), delta_(delta), lead_(grid.steps() + 1, 0.0), c_(grid.steps() + 1, 0.0) {
  if (!(alpha > -1.0 && alpha < -0.5)) throw RegimeError("rough Marchaud scheme needs alpha in (-1,-1/2)");
  if (!(delta > alpha + 1.0 && delta < 0.5)) throw ArgumentError("rough Marchaud scheme needs delta in (alpha+1, 1/2)");
  const double h = grid.h();
  const double g = gamma_fn(-alpha);
  const double pre = (alpha + 1.0) / ((alpha + 0.5) * g * std::pow(h, alpha + 1.0));
  const double p = delta - alpha - 1.0;  // > 0, so 0^p = 0 in the first lag
  for (std::size_t m = 1; m <= grid.steps(); ++m) {
    const double md = static_cast<double>(m);
    lead_[m] = std::pow(md * h, -alpha - 1.0) / g;
    const double prev = (m == 1) ? 0.0 : std::pow(md - 1.0, p);
    c_[m] = pre * std::pow(md, -delta) * (prev - std::pow(md, p));
  }
}

std::vector<double> RoughMarchaudKernel::nu(const std::vector<double>& z, double v0) const {
  if (z.size() != c_.size()) throw ArgumentError("rough Marchaud: path length does not match grid");
  std::vector<double> out(z.size());
  out[0] = v0;
  for (std::size_t k = 1; k < z.size(); ++k) {
    double s = 0.0;
    const double zk = z[k];
    for (std::size_t j = 0; j < k; ++j) s += (zk - z[j]) * c_[k - j];
    out[k] = v0 + zk * lead_[k] + s;
  }
  return out;
}

void validate(const VolScheme& s) {
  std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, FractionalEuler>) {
          if (!(v.alpha > 0.0 && v.alpha < 1.0)) throw RegimeError("FractionalEuler needs alpha in (0,1)");
        } else if constexpr (std::is_same_v<T, RoughMarchaud>) {
          if (!(v.alpha > -1.0 && v.alpha < -0.5)) throw RegimeError("RoughMarchaud needs alpha in (-1,-1/2)");
          if (!(v.delta > v.alpha + 1.0 && v.delta < 0.5)) throw ArgumentError("RoughMarchaud needs delta in (alpha+1, 1/2)");
        } else if constexpr (std::is_same_v<T, QuantizedFractional>) {
          if (!v.qm || v.qm->kind != MeasureKind::Mu) throw RegimeError("QuantizedFractional needs a mu measure");
        } else {
          if (!v.qm || v.qm->kind != MeasureKind::MuTilde) throw RegimeError("QuantizedRough needs a mu_tilde measure");
        }
      },
      s);
}

double scheme_alpha(const VolScheme& s) {
  return std::visit(
      [](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, FractionalEuler> || std::is_same_v<T, RoughMarchaud>) {
          return v.alpha;
        } else {
          return v.qm->alpha;
        }
      },
      s);
}

bool is_rough(const VolScheme& s) {
  return std::holds_alternative<RoughMarchaud>(s) || std::holds_alternative<QuantizedRough>(s);
}

std::string describe(const VolScheme& s) {
  std::ostringstream os;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, FractionalEuler>) {
          os << "fractional_euler(alpha=" << v.alpha << ")";
        } else if constexpr (std::is_same_v<T, RoughMarchaud>) {
          os << "rough_marchaud(alpha=" << v.alpha << ",delta=" << v.delta << ")";
        } else if constexpr (std::is_same_v<T, QuantizedFractional>) {
          os << "quantized_fractional(alpha=" << v.qm->alpha << ",atoms=" << v.qm->size() << ")";
        } else {
          os << "quantized_rough(alpha=" << v.qm->alpha << ",atoms=" << v.qm->size() << ")";
        }
      },
      s);
  return os.str();
}

std::vector<double> nu_fractional_euler(const std::vector<double>& z, double alpha, const TimeGrid& grid, double v0) {
  return FractionalEulerKernel(alpha, grid).nu(z, v0);
}

double integrated_nu_fractional_euler(const std::vector<double>& z, double alpha, const TimeGrid& grid, double v0) {
  return FractionalEulerKernel(alpha, grid).integrated(z, v0);
}

std::vector<double> nu_rough_marchaud(const std::vector<double>& z, double alpha, double delta, const TimeGrid& grid,
                                      double v0) {
  return RoughMarchaudKernel(alpha, delta, grid).nu(z, v0);
}

std::vector<double> nu_quantized(double v0, const QuantizedMeasure& qm, const Eigen::MatrixXd& factors) {
  if (qm.kind != MeasureKind::Mu) throw RegimeError("nu_quantized: needs a mu measure");
  if (static_cast<std::size_t>(factors.rows()) != qm.size()) throw ArgumentError("nu_quantized: factor rows do not match atoms");
  const Eigen::Map<const Eigen::VectorXd> q(qm.weights.data(), static_cast<Eigen::Index>(qm.size()));
  std::vector<double> out(static_cast<std::size_t>(factors.cols()));
  for (Eigen::Index k = 0; k < factors.cols(); ++k) out[static_cast<std::size_t>(k)] = v0 + q.dot(factors.col(k));
  return out;
}

std::vector<double> nu_quantized_rough(double v0, const std::vector<double>& z, const QuantizedMeasure& qm,
                                       const Eigen::MatrixXd& rough_factors, const TimeGrid& grid) {
  if (qm.kind != MeasureKind::MuTilde) throw RegimeError("nu_quantized_rough: needs a mu_tilde measure");
  if (static_cast<std::size_t>(rough_factors.rows()) != qm.size()) {
    throw ArgumentError("nu_quantized_rough: factor rows do not match atoms");
  }
  if (z.size() != grid.points() || static_cast<std::size_t>(rough_factors.cols()) != grid.points()) {
    throw ArgumentError("nu_quantized_rough: path length does not match grid");
  }
  const double a = qm.alpha;
  const double g = gamma_fn(-a);
  const Eigen::Map<const Eigen::VectorXd> q(qm.weights.data(), static_cast<Eigen::Index>(qm.size()));
  std::vector<double> out(grid.points());
  out[0] = v0;
  for (std::size_t k = 1; k < grid.points(); ++k) {
    out[k] = v0 + z[k] * std::pow(grid.t(k), -a - 1.0) / g + q.dot(rough_factors.col(static_cast<Eigen::Index>(k)));
  }
  return out;
}

std::vector<double> compute_nu(const VolScheme& s, const std::vector<double>& z, const TimeGrid& grid, double v0) {
  validate(s);
  return std::visit(
      [&](const auto& v) -> std::vector<double> {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, FractionalEuler>) {
          return nu_fractional_euler(z, v.alpha, grid, v0);
        } else if constexpr (std::is_same_v<T, RoughMarchaud>) {
          return nu_rough_marchaud(z, v.alpha, v.delta, grid, v0);
        } else if constexpr (std::is_same_v<T, QuantizedFractional>) {
          return nu_quantized(v0, *v.qm, simulate_factors(*v.qm, z, grid));
        } else {
          return nu_quantized_rough(v0, z, *v.qm, simulate_factors_rough(*v.qm, z, grid), grid);
        }
      },
      s);
}

}  // namespace frh
