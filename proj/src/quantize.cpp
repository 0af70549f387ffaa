#include "frheston/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "frheston/csv.hpp"

namespace frh {

const char* to_string(MeasureKind kind) {
  return kind == MeasureKind::Mu ? "mu" : "mu_tilde";
}

void check_alpha(double alpha, MeasureKind kind) {
  if (kind == MeasureKind::Mu) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("mu measure needs alpha in (0,1)");
  } else {
    if (!(alpha > -1.0 && alpha < -0.5)) throw DomainError("mu_tilde measure needs alpha in (-1,-1/2)");
  }
}

Partition::Partition(std::vector<double> points, int level) : points_(std::move(points)), level_(level) {
  if (points_.size() < 2) throw ArgumentError("partition needs at least two points");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!(points_[i] > 0.0) || !std::isfinite(points_[i])) throw ArgumentError("partition points must be positive and finite");
    if (i > 0 && !(points_[i] > points_[i - 1])) throw ArgumentError("partition points must be strictly increasing");
  }
}

double Partition::mesh() const {
  double m = 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i) m = std::max(m, points_[i] - points_[i - 1]);
  return m;
}

Partition make_partition(std::size_t n, double alpha, MeasureKind kind) {
  if (n < 2) throw ArgumentError("make_partition: n must be at least 2");
  check_alpha(alpha, kind);
  const double nd = static_cast<double>(n);
  const double log_lo = -2.0 * std::log(nd);
  const double log_span = 4.0 * std::log(nd);
  std::vector<double> pts(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    pts[i] = std::exp(log_lo + log_span * static_cast<double>(i) / nd);
  }
  // pin the endpoints so that they are exact powers
  pts.front() = 1.0 / (nd * nd);
  pts.back() = nd * nd;
  return Partition(std::move(pts), 0);
}

Partition refine(const Partition& p) {
  const auto& src = p.points();
  std::vector<double> pts;
  pts.reserve(2 * src.size() + 1);
  pts.push_back(src.front() / 4.0);
  for (std::size_t i = 0; i < src.size(); ++i) {
    pts.push_back(src[i]);
    if (i + 1 < src.size()) pts.push_back(std::sqrt(src[i] * src[i + 1]));
  }
  pts.push_back(src.back() * 4.0);
  return Partition(std::move(pts), p.level() + 1);
}

namespace {

void check_cell(double lo, double hi) {
  if (!(lo > 0.0)) throw ArgumentError("cell lower end must be positive");
  if (!(hi > lo)) throw ArgumentError("cell must satisfy lo < hi");
}

// density x^e / norm; e = -alpha (Mu) or alpha + 1 (MuTilde)
struct PowerLaw {
  double power;  // exponent of the antiderivative: e + 1
  double norm;
};

PowerLaw power_law(double alpha, MeasureKind kind) {
  check_alpha(alpha, kind);
  if (kind == MeasureKind::Mu) return {1.0 - alpha, gamma_fn(alpha) * gamma_fn(1.0 - alpha)};
  return {alpha + 2.0, gamma_fn(-alpha) * gamma_fn(alpha + 1.0)};
}

// (hi^p - lo^p) / p without cancellation for narrow cells
double power_increment(double lo, double hi, double p) {
  const double l = std::log(hi / lo);
  return std::pow(lo, p) * std::expm1(p * l) / p;
}

}  // namespace

double cell_weight(double lo, double hi, double alpha, MeasureKind kind) {
  check_cell(lo, hi);
  const PowerLaw pl = power_law(alpha, kind);
  return power_increment(lo, hi, pl.power) / pl.norm;
}

double cell_barycenter(double lo, double hi, double alpha, MeasureKind kind) {
  check_cell(lo, hi);
  const PowerLaw pl = power_law(alpha, kind);
  const double l = std::log(hi / lo);
  const double p = pl.power;
  const double x = lo * (p / (p + 1.0)) * std::expm1((p + 1.0) * l) / std::expm1(p * l);
  return std::clamp(x, std::nextafter(lo, hi), std::nextafter(hi, lo));
}

double QuantizedMeasure::total_mass() const {
  double s = 0.0;
  for (double q : weights) s += q;
  return s;
}

QuantizedMeasure quantize(const Partition& p, double alpha, MeasureKind kind) {
  check_alpha(alpha, kind);
  const auto& pts = p.points();
  QuantizedMeasure qm{kind, alpha, {}, {}, p};
  qm.nodes.reserve(p.cells());
  qm.weights.reserve(p.cells());
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    qm.nodes.push_back(cell_barycenter(pts[i], pts[i + 1], alpha, kind));
    qm.weights.push_back(cell_weight(pts[i], pts[i + 1], alpha, kind));
  }
  return qm;
}

double approx_kernel(double t, const QuantizedMeasure& qm) {
  if (!(t > 0.0)) throw DomainError("approx_kernel: t must be positive");
  double s = 0.0;
  for (std::size_t i = 0; i < qm.size(); ++i) s += qm.weights[i] * std::exp(-t * qm.nodes[i]);
  return s;
}

std::vector<QuantizedMeasure> dyadic_chain(std::size_t n0, int levels, double alpha, MeasureKind kind) {
  if (levels < 0) throw ArgumentError("dyadic_chain: levels must be nonnegative");
  std::vector<QuantizedMeasure> out;
  out.reserve(static_cast<std::size_t>(levels) + 1);
  Partition p = make_partition(n0, alpha, kind);
  out.push_back(quantize(p, alpha, kind));
  for (int l = 0; l < levels; ++l) {
    p = refine(p);
    out.push_back(quantize(p, alpha, kind));
  }
  return out;
}

void write_csv(std::ostream& os, const QuantizedMeasure& qm) {
  csv::Writer w(os);
  w.header({"index", "xi_lo", "xi_hi", "node", "weight"});
  const auto& pts = qm.source.points();
  for (std::size_t i = 0; i < qm.size(); ++i) {
    w.field(i).field(pts[i]).field(pts[i + 1]).field(qm.nodes[i]).field(qm.weights[i]);
    w.end_row();
  }
}

}  // namespace frh
