#include "solpole/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <boost/math/tools/minima.hpp>

#include "solpole/exppoly.hpp"

namespace solpole {

namespace {

struct Signs {
  int a = 1;
  int b = 1;
};

Signs factor_signs(Variant v, int which) {
  if (which != 0 && which != 1) throw PreconditionError("factor index must be 0 or 1");
  if (v == Variant::Plus) return which == 0 ? Signs{1, 1} : Signs{-1, -1};
  return which == 0 ? Signs{1, -1} : Signs{-1, 1};
}

// |terms| of a factor at the kernel's scaling exp(-ls/2)
double factor_magnitude(const TwoSoliton& s, Complex x, double t, double ls) {
  const double e1 = s.exponent(1, x, t).real(), e2 = s.exponent(2, x, t).real();
  const double g = s.config().gamma;
  return std::exp(-0.5 * ls) * (1.0 + g * std::exp(e1) + g * std::exp(e2)) +
         std::exp(e1 + e2 - 0.5 * ls);
}

double rel_F(const TwoSoliton& s, Complex x, double t) {
  const double ls = s.log_scale(x, t);
  return std::abs(s.F(x, t, ls)) / s.F_magnitude(x, t, ls);
}

void require_comm(const SolitonConfig& cfg) {
  if (!cfg.comm) throw PreconditionError("requires commensurable (exact) wavenumbers");
}

struct Probe {
  Complex x;
  double t;
};

std::vector<Probe> probes(const SolitonConfig& cfg, int n) {
  std::mt19937_64 rng(20240607);
  const double h = cfg.strip_scale();
  std::uniform_real_distribution<double> re(-3.0, 3.0), im(-h, h), tt(-0.5, 0.5);
  std::vector<Probe> out;
  for (int i = 0; i < n; ++i) {
    const double a = re(rng), b = im(rng);
    out.push_back({{a, b}, tt(rng)});
  }
  return out;
}

// smallest c in 0..3 with p1 c = t1 and p2 c = t2 (mod 4)
int solve_mod4(int p1, int p2, int t1, int t2) {
  for (int c = 0; c < 4; ++c)
    if ((p1 * c) % 4 == t1 && (p2 * c) % 4 == t2) return c;
  throw Error("no translation solves the congruences");
}

TranslationCheck check_kdv_form(const SolitonConfig& cfg, int which, double theta, int n) {
  const TwoSoliton s(cfg);
  TranslationCheck out{theta, 0.0, n};
  for (const auto& p : probes(cfg, n)) {
    const double ls = s.log_scale(p.x, p.t);
    const Complex lhs = s.factor(which, p.x - Complex(0.0, theta), p.t, ls);
    const Complex f1 = std::exp(s.exponent(1, p.x, p.t) - 0.25 * ls);
    const Complex f2 = std::exp(s.exponent(2, p.x, p.t) - 0.25 * ls);
    const double g = cfg.gamma;
    // 1 + g f1 + g f2 + f1 f2 at the scaling exp(-ls/2)
    const Complex rhs = std::exp(-0.5 * ls) + g * (f1 + f2) * std::exp(-0.25 * ls) + f1 * f2;
    out.max_residual =
        std::max(out.max_residual, std::abs(lhs - rhs) / factor_magnitude(s, p.x, p.t, ls));
  }
  return out;
}

}  // namespace

RealDecomp real_decomp(const SolitonConfig& cfg, Complex x, double t) {
  const TwoSoliton s(cfg);
  return {-x.imag(), s.exponent(1, x, t).real(), s.exponent(2, x, t).real()};
}

FactorPair factor_F(const SolitonConfig& cfg, Complex x, double t) {
  const TwoSoliton s(cfg);
  return {s.factor(0, x, t, 0.0), s.factor(1, x, t, 0.0)};
}

int vanishing_factor(const SolitonConfig& cfg, Complex x, double t) {
  const TwoSoliton s(cfg);
  const double ls = s.log_scale(x, t);
  return std::abs(s.factor(0, x, t, ls)) <= std::abs(s.factor(1, x, t, ls)) ? 0 : 1;
}

LineMinimum line_minimum(const SolitonConfig& cfg, double t, double im, const RealGrid& grid) {
  if (grid.n < 2 || !(grid.hi > grid.lo)) throw PreconditionError("bad grid");
  const TwoSoliton s(cfg);
  auto h = [&](double re) { return rel_F(s, Complex(re, im), t); };
  const double dx = (grid.hi - grid.lo) / (grid.n - 1);
  double best = HUGE_VAL, arg = grid.lo;
  for (int i = 0; i < grid.n; ++i) {
    const double re = grid.lo + i * dx;
    const double v = h(re);
    if (v < best) best = v, arg = re;
  }
  const auto r = boost::math::tools::brent_find_minima(h, std::max(grid.lo, arg - dx),
                                                       std::min(grid.hi, arg + dx), 52);
  if (r.second < best) best = r.second, arg = r.first;
  return {im, best, Complex(arg, im)};
}

std::vector<LineMinimum> check_no_real_poles(const SolitonConfig& cfg, double t,
                                             const RealGrid& grid) {
  std::vector<LineMinimum> out{line_minimum(cfg, t, 0.0, grid)};
  if (cfg.comm) out.push_back(line_minimum(cfg, t, cfg.strip_scale(), grid));
  return out;
}

double CosResiduals::max_relative() const {
  return std::max({std::abs(r12), std::abs(r1), std::abs(r2)}) / scale;
}

CosResiduals cos_identities_residual(const SolitonConfig& cfg, Complex x, double t, int which) {
  const Signs sg = factor_signs(cfg.variant, which);
  const TwoSoliton s(cfg);
  const double ls = s.log_scale(x, t);
  if (std::abs(s.factor(which, x, t, ls)) > 1e-8 * factor_magnitude(s, x, t, ls))
    throw PreconditionError("not a zero of the factor");
  const RealDecomp d = real_decomp(cfg, x, t);
  const double g = cfg.gamma;
  const double ph1 = cfg.k1 * d.alpha + (sg.a < 0 ? kPi : 0.0);
  const double ph2 = cfg.k2 * d.alpha + (sg.b < 0 ? kPi : 0.0);
  const double sm1 = 2 * std::sinh(d.log_A1), sm2 = 2 * std::sinh(d.log_A2);
  const double cp1 = 2 * std::cosh(d.log_A1), cp2 = 2 * std::cosh(d.log_A2);
  CosResiduals r;
  r.r12 = sm2 * std::cos(ph1) + sm1 * std::cos(ph2);
  r.r2 = cp1 * std::cos(ph2) - std::sin(ph1 + ph2) / g + g * std::sin(ph2 - ph1);
  r.r1 = cp2 * std::cos(ph1) - std::sin(ph1 + ph2) / g - g * std::sin(ph2 - ph1);
  r.scale = std::max({cp1, cp2, g, 1.0 / g});
  r.cos_k1_alpha = std::cos(cfg.k1 * d.alpha);
  r.cos_k2_alpha = std::cos(cfg.k2 * d.alpha);
  return r;
}

int VerticalSign::measured_sign() const {
  if (std::abs(measured) < kSignDeadZone) return 0;
  return measured > 0 ? 1 : -1;
}

VerticalSign vertical_sign(const SolitonConfig& cfg, Complex x, double t, int which) {
  const Signs sg = factor_signs(cfg.variant, which);
  const TwoSoliton s(cfg);
  const double ls = s.log_scale(x, t);
  const double mag = factor_magnitude(s, x, t, ls);
  if (std::abs(s.factor(which, x, t, ls)) > 1e-8 * mag)
    throw PreconditionError("not a zero of the factor");
  const Complex qx = s.factor(which, x, t, ls, 1, 0);
  if (std::abs(qx) * cfg.strip_scale() < 1e-6 * mag)
    throw PreconditionError("d/dx of the factor vanishes: not a simple zero");
  const Complex qt = s.factor(which, x, t, ls, 0, 1);
  const RealDecomp d = real_decomp(cfg, x, t);
  const double ph2 = cfg.k2 * d.alpha + (sg.b < 0 ? kPi : 0.0);
  VerticalSign v;
  v.predicted_value = 2 * std::sinh(d.log_A1) * std::cos(ph2);
  v.predicted = std::abs(v.predicted_value) < kSignDeadZone ? 0 : (v.predicted_value > 0 ? 1 : -1);
  v.measured = (-qt / qx).imag();
  return v;
}

TranslationCheck parity_translation_theta(const SolitonConfig& cfg, int n) {
  require_comm(cfg);
  if ((cfg.comm->p1 + cfg.comm->p2) % 2 == 0)
    throw PreconditionError("p1 and p2 must have opposite parity");
  // one of k_j theta is an odd multiple of pi, the other an even one
  const double theta = cfg.comm->lambda * kPi;
  const TwoSoliton sp(cfg.with_variant(Variant::Plus)), sm(cfg.with_variant(Variant::Minus));
  TranslationCheck out{theta, 0.0, n};
  for (const auto& p : probes(cfg, n)) {
    const double ls = sp.log_scale(p.x, p.t);
    const Complex lhs = sp.F(p.x - Complex(0.0, theta), p.t, ls);
    const Complex rhs = sm.F(p.x, p.t, ls);
    out.max_residual =
        std::max(out.max_residual, std::abs(lhs - rhs) / sm.F_magnitude(p.x, p.t, ls));
  }
  return out;
}

OddParityTranslation odd_parity_translation(const SolitonConfig& cfg, int n) {
  require_comm(cfg);
  const int p1 = cfg.comm->p1, p2 = cfg.comm->p2;
  if (p1 % 2 == 0 || p2 % 2 == 0) throw PreconditionError("p1 and p2 must both be odd");
  const bool plus = cfg.variant == Variant::Plus;
  if ((plus ? p2 - p1 : p2 + p1) % 4 != 0)
    throw PreconditionError(plus ? "p2 - p1 must be divisible by 4"
                                 : "p2 + p1 must be divisible by 4");
  // exp(i k_j theta) = exp(i p_j c pi/2) with c = 2 theta/(lambda pi):
  // F1 needs (-i, -i) for Plus and (-i, i) for Minus; F2 the conjugates
  const int c1 = plus ? solve_mod4(p1, p2, 3, 3) : solve_mod4(p1, p2, 3, 1);
  const int c2 = plus ? solve_mod4(p1, p2, 1, 1) : solve_mod4(p1, p2, 1, 3);
  const double unit = cfg.comm->lambda * kPi / 2;
  return {check_kdv_form(cfg, 0, c1 * unit, n), check_kdv_form(cfg, 1, c2 * unit, n)};
}

Complex contour_residue(const std::function<Complex(Complex)>& fn, Complex center, double radius,
                        int nodes) {
  if (nodes < 8 || !(radius > 0.0)) throw PreconditionError("bad contour");
  Complex sum;
  for (int k = 0; k < nodes; ++k) {
    const Complex e = std::polar(1.0, 2 * kPi * k / nodes);
    sum += fn(center + radius * e) * e;
  }
  return sum * radius / static_cast<double>(nodes);
}

Residue residue_at_pole(const SolitonConfig& cfg, Complex x_pole, double t) {
  const TwoSoliton s(cfg);
  const double L = cfg.strip_scale();
  Complex x = x_pole;
  double ls = 0.0, mag = 1.0;
  Complex fx;
  for (int i = 0; i < 40; ++i) {
    ls = s.log_scale(x, t);
    mag = s.F_magnitude(x, t, ls);
    fx = s.F(x, t, ls, 1, 0);
    const Complex step = s.F(x, t, ls) / fx;
    if (std::abs(step) > L) throw PreconditionError("no zero of F near the given point");
    x -= step;
    if (std::abs(step) < 1e-15 * (1.0 + std::abs(x))) break;
  }
  ls = s.log_scale(x, t);
  mag = s.F_magnitude(x, t, ls);
  fx = s.F(x, t, ls, 1, 0);
  if (std::abs(s.F(x, t, ls)) > 1e-10 * mag)
    throw PreconditionError("no zero of F near the given point");
  if (std::abs(fx) * L < 1e-6 * mag) throw PreconditionError("multiple zero: no simple residue");

  Residue r;
  r.x = x;
  r.value = 2.0 * cfg.gamma * s.G(x, t, ls) / fx;

  double isolation = std::abs(fx / s.F(x, t, ls, 2, 0));
  if (cfg.is_exact() && cfg.has_zero_shifts()) {
    for (const auto& p : oracle_poles(cfg, t)) {
      const double d = std::abs(wrap_to_strip(p.x - x, L));
      if (d > 1e-6) isolation = std::min(isolation, d);
    }
  }
  r.radius = 1e-3 * std::min(isolation, L / 4);
  r.contour = contour_residue([&](Complex z) { return value_of(s.u(z, t)); }, x, r.radius);
  return r;
}

InvariantResult sign_law_over_curves(const SolitonConfig& cfg,
                                     const std::vector<PoleCurve>& curves) {
  InvariantResult res;
  res.name = "vertical_sign_law";
  const InteractionPoint ip = interaction_point(cfg);
  std::size_t zero_predicted = 0, dead_zone = 0, skipped = 0;
  for (const auto& c : curves)
    for (const auto& sm : c.samples) {
      if (sm.t == ip.t0 && sm.x.real() == ip.x0) continue;
      const int which = vanishing_factor(cfg, sm.x, sm.t);
      VerticalSign v;
      try {
        v = vertical_sign(cfg, sm.x, sm.t, which);
      } catch (const PreconditionError&) {
        ++skipped;  // near a multiple zero
        continue;
      }
      ++res.checked;
      if (v.predicted == 0) ++zero_predicted;
      else if (v.measured_sign() == 0) ++dead_zone;
      if (!v.agrees() && std::abs(v.measured) >= res.worst) {
        res.pass = false;
        res.worst = std::abs(v.measured);
        res.witness_x = sm.x;
        res.witness_t = sm.t;
      }
    }
  res.note = std::to_string(zero_predicted) + " samples with predicted sign 0, " +
             std::to_string(dead_zone) + " with |Im x'| in the dead zone, " +
             std::to_string(skipped) + " near-multiple samples skipped";
  return res;
}

InvariantResult cos_zero_over_curves(const SolitonConfig& cfg,
                                     const std::vector<PoleCurve>& curves) {
  InvariantResult res;
  res.name = "cos_zero_lattice";
  std::size_t hits = 0;
  for (const auto& c : curves)
    for (const auto& sm : c.samples) {
      ++res.checked;
      const double alpha = -sm.x.imag();
      // both cosines: one alone can be exponentially small without vanishing (large |t|)
      if (std::abs(std::cos(cfg.k1 * alpha)) > 1e-8 || std::abs(std::cos(cfg.k2 * alpha)) > 1e-8)
        continue;
      ++hits;
      bool ok = cfg.comm && cfg.comm->p1 % 2 == 1 && cfg.comm->p2 % 2 == 1;
      if (ok) {
        const double q = alpha / (cfg.comm->lambda * kPi / 2);
        const double qr = std::round(q);
        ok = std::abs(q - qr) < 1e-6 && static_cast<long long>(qr) % 2 != 0;
      }
      if (!ok) {
        res.pass = false;
        res.witness_x = sm.x;
        res.witness_t = sm.t;
      }
    }
  res.note = std::to_string(hits) + " samples with cos k1 alpha = cos k2 alpha = 0";
  return res;
}

InvariantResult cos_identities_over_curves(const SolitonConfig& cfg,
                                           const std::vector<PoleCurve>& curves) {
  InvariantResult res;
  res.name = "cos_identities";
  std::size_t skipped = 0;
  for (const auto& c : curves)
    for (const auto& sm : c.samples) {
      CosResiduals r;
      try {
        r = cos_identities_residual(cfg, sm.x, sm.t, vanishing_factor(cfg, sm.x, sm.t));
      } catch (const PreconditionError&) {
        ++skipped;
        continue;
      }
      ++res.checked;
      if (r.max_relative() > res.worst) {
        res.worst = r.max_relative();
        res.witness_x = sm.x;
        res.witness_t = sm.t;
      }
    }
  res.pass = res.worst <= 1e-8;
  res.note = std::to_string(skipped) + " samples not resolved as factor zeros";
  return res;
}

nlohmann::ordered_json to_json(const InvariantResult& r) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  j["pass"] = r.pass;
  j["checkable"] = r.checkable;
  j["checked"] = r.checked;
  j["worst"] = r.worst;
  if (r.witness_x)
    j["witness"] = {{"x", {r.witness_x->real(), r.witness_x->imag()}},
                    {"t", r.witness_t.value_or(0.0)}};
  else
    j["witness"] = nullptr;
  j["note"] = r.note;
  return j;
}

}  // namespace solpole
