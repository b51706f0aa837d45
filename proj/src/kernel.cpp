#include "solpole/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace solpole {

namespace {

// log(DBL_MAX) with a little headroom
constexpr double kMaxExponent = 709.0;

std::string point_string(Complex x, double t) {
  std::ostringstream os;
  os.precision(17);
  os << "x=" << x.real() << (x.imag() < 0 ? "" : "+") << x.imag() << "i, t=" << t;
  return os.str();
}

Complex checked_exp(Complex e, const char* what) {
  if (e.real() > kMaxExponent) {
    std::ostringstream os;
    os.precision(17);
    os << what << ": real exponent " << e.real() << " exceeds the representable range";
    throw RangeError(os.str());
  }
  return std::exp(e);
}

double int_pow(double base, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= base;
  return r;
}

}  // namespace

Complex value_of(const PointValue& v) {
  if (const auto* c = std::get_if<Complex>(&v)) return *c;
  throw PreconditionError("value requested at a pole (" +
                          point_string(std::get<PoleMarker>(v).at, 0.0) + ")");
}

namespace detail {

Complex ExpCombination::eval(Complex e1, Complex e2, double log_scale, double k1, double k2,
                             int nx, int nt) const {
  Complex sum{0.0, 0.0};
  for (const auto& m : terms_) {
    const double dx = -(m.a * k1 + m.b * k2);
    const double dt = m.a * k1 * k1 * k1 + m.b * k2 * k2 * k2;
    const double weight = int_pow(dx, nx) * int_pow(dt, nt);
    if (weight == 0.0) continue;
    sum += m.coef * weight * std::exp(double(m.a) * e1 + double(m.b) * e2 - log_scale);
  }
  return sum;
}

double ExpCombination::abs_sum(Complex e1, Complex e2, double log_scale) const {
  double s = 0.0;
  for (const auto& m : terms_)
    s += std::abs(m.coef) * std::exp(m.a * e1.real() + m.b * e2.real() - log_scale);
  return s;
}

double ExpCombination::max_log(Complex e1, Complex e2) const {
  double best = -HUGE_VAL;
  for (const auto& m : terms_) best = std::max(best, m.a * e1.real() + m.b * e2.real());
  return best;
}

}  // namespace detail

TwoSoliton::TwoSoliton(SolitonConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  using detail::Monomial;
  const double s = cfg_.sigma();
  const double g = cfg_.gamma;
  const double g2 = g * g;
  const Complex ig{0.0, g};
  F_ = detail::ExpCombination({{1.0, 0, 0},
                               {(2.0 - 2.0 * g2) * s, 1, 1},
                               {1.0, 2, 2},
                               {g2, 2, 0},
                               {g2, 0, 2}});
  G_ = detail::ExpCombination({{-cfg_.k1 * s, 1, 0},
                               {-cfg_.k1 * s, 1, 2},
                               {cfg_.k2, 0, 1},
                               {cfg_.k2, 2, 1}});
  // qa = 1 + i g phi1 - i g f2 + phi1 f2, qb = 1 - i g phi1 + i g f2 + phi1 f2
  detail::ExpCombination qa({{1.0, 0, 0}, {ig * s, 1, 0}, {-ig, 0, 1}, {s, 1, 1}});
  detail::ExpCombination qb({{1.0, 0, 0}, {-ig * s, 1, 0}, {ig, 0, 1}, {s, 1, 1}});
  // F1- = qa, F2- = qb; F1+ = qb, F2+ = qa
  if (cfg_.variant == Variant::Minus)
    factors_ = {qa, qb};
  else
    factors_ = {qb, qa};
}

Complex TwoSoliton::exponent(int j, Complex x, double t) const {
  const double k = j == 1 ? cfg_.k1 : cfg_.k2;
  const double shift = j == 1 ? cfg_.x1 : cfg_.x2;
  return -k * (x - shift) + k * k * k * t;
}

double TwoSoliton::log_scale(Complex x, double t) const {
  const double a = exponent(1, x, t).real();
  const double b = exponent(2, x, t).real();
  return std::max(0.0, 2.0 * a) + std::max(0.0, 2.0 * b);
}

ScaledFG TwoSoliton::scaled_FG(Complex x, double t) const {
  const double ls = log_scale(x, t);
  return {F(x, t, ls), G(x, t, ls), ls};
}

Complex TwoSoliton::F(Complex x, double t, double ls, int nx, int nt) const {
  return F_.eval(exponent(1, x, t), exponent(2, x, t), ls, cfg_.k1, cfg_.k2, nx, nt);
}

Complex TwoSoliton::G(Complex x, double t, double ls, int nx, int nt) const {
  return G_.eval(exponent(1, x, t), exponent(2, x, t), ls, cfg_.k1, cfg_.k2, nx, nt);
}

double TwoSoliton::F_magnitude(Complex x, double t, double ls) const {
  return F_.abs_sum(exponent(1, x, t), exponent(2, x, t), ls);
}

Complex TwoSoliton::factor(int which, Complex x, double t, double ls, int nx, int nt) const {
  return factors_.at(static_cast<std::size_t>(which))
      .eval(exponent(1, x, t), exponent(2, x, t), 0.5 * ls, cfg_.k1, cfg_.k2, nx, nt);
}

bool TwoSoliton::is_pole_point(Complex x, double t) const {
  const double ls = log_scale(x, t);
  const double absF = std::abs(F(x, t, ls));
  const double slope = std::abs(F(x, t, ls, 1, 0)) * cfg_.strip_scale();
  return absF < kPoleTolerance * std::max(F_magnitude(x, t, ls), slope);
}

PointValue TwoSoliton::u(Complex x, double t) const {
  const auto fg = scaled_FG(x, t);
  if (is_pole_point(x, t)) return PoleMarker{x, std::abs(fg.F)};
  return 2.0 * cfg_.gamma * fg.G / fg.F;
}

UJet TwoSoliton::u_jet(Complex x, double t) const {
  if (is_pole_point(x, t))
    throw PreconditionError("u_jet requested at a pole (" + point_string(x, t) + ")");
  const double ls = log_scale(x, t);
  const Complex f = F(x, t, ls), fx = F(x, t, ls, 1), fxx = F(x, t, ls, 2);
  const Complex g = G(x, t, ls), gx = G(x, t, ls, 1), gxx = G(x, t, ls, 2);
  const double c = 2.0 * cfg_.gamma;
  const Complex num1 = gx * f - g * fx;
  UJet jet;
  jet.u = c * g / f;
  jet.ux = c * num1 / (f * f);
  jet.uxx = c * ((gxx * f - g * fxx) / (f * f) - 2.0 * fx * num1 / (f * f * f));
  return jet;
}

Complex eval_f(const SolitonConfig& cfg, int j, Complex x, double t) {
  if (j != 1 && j != 2) throw PreconditionError("f_j index must be 1 or 2");
  const TwoSoliton sol(cfg);
  return checked_exp(sol.exponent(j, x, t), j == 1 ? "f_1" : "f_2");
}

PointValue eval_g(const SolitonConfig& cfg, Complex x, double t) {
  const TwoSoliton sol(cfg);
  const Complex e1 = sol.exponent(1, x, t), e2 = sol.exponent(2, x, t);
  const double ls = std::max({0.0, e1.real(), e2.real(), e1.real() + e2.real()});
  const double s = cfg.sigma();
  const Complex phi1 = s * std::exp(e1 - ls);
  const Complex f2 = std::exp(e2 - ls);
  const Complex one = std::exp(-ls);
  const Complex prod = s * std::exp(e1 + e2 - ls);
  const Complex den = one + prod;
  const double slope = (cfg.k1 + cfg.k2) * std::abs(prod) * cfg.strip_scale();
  const Complex num = phi1 - f2;
  if (std::abs(den) < kPoleTolerance * std::max(std::abs(one) + std::abs(prod), slope)) {
    // 0/0 (e.g. f1 = f2 = +-i for Minus): the limit is the ratio of x-derivatives
    const double num_scale = std::abs(phi1) + std::abs(f2);
    const Complex num_x = -cfg.k1 * phi1 + cfg.k2 * f2;
    if (std::abs(num) < kPoleTolerance * std::max(num_scale, std::abs(num_x) * cfg.strip_scale()))
      return cfg.gamma * num_x / (-(cfg.k1 + cfg.k2) * prod);
    return PoleMarker{x, std::abs(den)};
  }
  return cfg.gamma * num / den;
}

FGValue eval_FG(const SolitonConfig& cfg, Complex x, double t) {
  const TwoSoliton sol(cfg);
  const auto fg = sol.scaled_FG(x, t);
  if (fg.log_scale > kMaxExponent) {
    std::ostringstream os;
    os.precision(17);
    os << "F,G: real exponent " << fg.log_scale << " exceeds the representable range";
    throw RangeError(os.str());
  }
  const double scale = std::exp(fg.log_scale);
  return {fg.F * scale, fg.G * scale};
}

PointValue eval_u(const SolitonConfig& cfg, Complex x, double t) {
  return TwoSoliton(cfg).u(x, t);
}

namespace {

// 2k/(e^{-e} + e^{e}), evaluated without overflow
Complex centered_soliton(double k, Complex e) {
  if (e.real() > 0.0) {
    const Complex q = std::exp(-e);
    return 2.0 * k * q / (1.0 + q * q);
  }
  const Complex q = std::exp(e);
  return 2.0 * k * q / (1.0 + q * q);
}

// (1 + e^{2e}) * exp(-max(0, 2 Re e))
Complex scaled_one_plus_square(Complex e) {
  const double c = std::max(0.0, 2.0 * e.real());
  return std::exp(-c) + std::exp(2.0 * e - c);
}

}  // namespace

PointValue eval_u_sumform(const SolitonConfig& cfg, Complex x, double t) {
  const TwoSoliton sol(cfg);
  if (sol.is_pole_point(x, t)) return PoleMarker{x, std::abs(sol.scaled_FG(x, t).F)};
  const Complex e1 = sol.exponent(1, x, t), e2 = sol.exponent(2, x, t);
  const Complex u1 = centered_soliton(cfg.k1, e1);
  const Complex u2 = centered_soliton(cfg.k2, e2);
  // log_scale of F equals the combined scale of (1 + f1^2)(1 + f2^2)
  const Complex D = sol.scaled_FG(x, t).F / (scaled_one_plus_square(e1) *
                                             scaled_one_plus_square(e2));
  return cfg.gamma * (u2 - cfg.sigma() * u1) / D;
}

PointValue eval_one_soliton(double k, double x0, Complex x, double t) {
  if (!(k > 0.0)) throw PreconditionError("one-soliton wavenumber must be positive");
  const Complex z = -k * (x - x0) + k * k * k * t;
  // -2k e^{-z} / (1 + e^{-2z}) with the larger exponential factored out
  const Complex w = z.real() >= 0.0 ? z : -z;
  const Complex q = std::exp(-2.0 * w);
  const Complex den = 1.0 + q;
  const double slope = 2.0 * k * std::abs(q) * (kPi / k);
  if (std::abs(den) < kPoleTolerance * std::max(1.0 + std::abs(q), slope))
    return PoleMarker{x, std::abs(den)};
  return -2.0 * k * std::exp(-w) / den;
}

InteractionPoint interaction_point_unnormalized(double k1, double k2, double x1, double x2) {
  if (!(k1 > 0.0 && k2 > k1)) throw PreconditionError("require 0 < k1 < k2");
  const double gamma = (k2 + k1) / (k2 - k1);
  const double lg = std::log(gamma);
  const double dk2 = k2 * k2 - k1 * k1;
  const double denom = (k2 + k1) * k1 * k2;
  InteractionPoint p;
  p.t0 = -(x2 - x1) / dk2 - lg / denom;
  p.x0 = (k2 * k2 * x1 - k1 * k1 * x2) / dk2 - (k1 * k1 + k1 * k2 + k2 * k2) * lg / denom;
  return p;
}

InteractionPoint interaction_point(const SolitonConfig& cfg) {
  const double lg = std::log(cfg.gamma);
  return interaction_point_unnormalized(cfg.k1, cfg.k2, cfg.x1 + lg / cfg.k1,
                                        cfg.x2 + lg / cfg.k2);
}

PointValue eval_g_unnormalized(double k1, double k2, Variant v, double x1, double x2,
                               Complex x, double t) {
  const double gamma = (k2 + k1) / (k2 - k1);
  const Complex f1 = checked_exp(-k1 * (x - x1) + k1 * k1 * k1 * t, "f~_1");
  const Complex f2 = checked_exp(-k2 * (x - x2) + k2 * k2 * k2 * t, "f~_2");
  const double s = v == Variant::Minus ? 1.0 : -1.0;
  const Complex prod = s * f1 * f2 / (gamma * gamma);
  const Complex den = 1.0 + prod;
  if (std::abs(den) < kPoleTolerance * (1.0 + std::abs(prod))) return PoleMarker{x, std::abs(den)};
  return (s * f1 - f2) / den;
}

EqgResidual eqg_residual(const SolitonConfig& cfg, Complex x, double t) {
  if (is_pole(eval_g(cfg, x, t)))
    throw PreconditionError("eqg_residual: g has a pole at " + point_string(x, t) +
                            "; choose a different sample point");
  const TwoSoliton sol(cfg);
  const double k1 = cfg.k1, k2 = cfg.k2, gm = cfg.gamma;
  const Complex p = cfg.sigma() * checked_exp(sol.exponent(1, x, t), "f_1");
  const Complex q = checked_exp(sol.exponent(2, x, t), "f_2");
  const Complex D = 1.0 + p * q;
  const double k13 = k1 * k1 * k1, k23 = k2 * k2 * k2;

  const Complex g = gm * (p - q) / D;
  const Complex gt = gm * (k13 * p - k23 * q + k13 * p * q * q - k23 * p * p * q) / (D * D);
  const Complex gx = gm * (k2 * q - k1 * p - k1 * p * q * q + k2 * p * p * q) / (D * D);
  const Complex gxx =
      gm / (D * D * D) *
      (k1 * k1 * p - k2 * k2 * q + (k1 * k1 + 4 * k1 * k2 + k2 * k2) * (p * q * q - p * p * q) -
       k1 * k1 * p * p * q * q * q + k2 * k2 * p * p * p * q * q);
  const double c1 = k13 + 4 * k23 + 6 * k1 * k1 * k2 + 12 * k1 * k2 * k2;
  const double c2 = 4 * k13 + k23 + 6 * k1 * k2 * k2 + 12 * k1 * k1 * k2;
  const Complex gxxx =
      gm / (D * D * D * D) *
      (k23 * q - k13 * p - c1 * (p * q * q + p * p * p * q * q) +
       c2 * (p * p * q + p * p * q * q * q) - k13 * p * p * p * q * q * q * q +
       k23 * p * p * p * p * q * q * q);

  const Complex lhs1 = (1.0 + g * g) * (gt + gxxx);
  const Complex lhs2 = 6.0 * gx * (gx * gx - g * gxx);
  EqgResidual r{lhs1 + lhs2, std::max(std::abs(lhs1), std::abs(lhs2))};
  if (!std::isfinite(r.value.real()) || !std::isfinite(r.value.imag()))
    throw RangeError("eqg_residual: non-finite intermediate at " + point_string(x, t));
  return r;
}

namespace {

template <typename Eval>
Complex fd_mkdv_residual(Eval&& eval, Complex x, double t, double h) {
  if (!(h > 0.0)) throw PreconditionError("finite-difference step must be positive");
  auto at = [&](double dx, double dt) {
    const PointValue v = eval(x + dx, t + dt);
    if (is_pole(v))
      throw PreconditionError("finite-difference stencil hits a pole at node " +
                              point_string(x + dx, t + dt));
    return std::get<Complex>(v);
  };
  const Complex u0 = at(0, 0);
  const Complex ut = (at(0, h) - at(0, -h)) / (2 * h);
  const Complex ux = (at(h, 0) - at(-h, 0)) / (2 * h);
  const Complex uxxx =
      (at(1.5 * h, 0) - 3.0 * at(0.5 * h, 0) + 3.0 * at(-0.5 * h, 0) - at(-1.5 * h, 0)) /
      (h * h * h);
  return ut + uxxx + 6.0 * u0 * u0 * ux;
}

}  // namespace

Complex pde_residual(const SolitonConfig& cfg, Complex x, double t, double h) {
  const TwoSoliton sol(cfg);
  return fd_mkdv_residual([&](Complex xx, double tt) { return sol.u(xx, tt); }, x, t, h);
}

Complex pde_residual_one_soliton(double k, double x0, Complex x, double t, double h) {
  return fd_mkdv_residual(
      [&](Complex xx, double tt) { return eval_one_soliton(k, x0, xx, tt); }, x, t, h);
}

}  // namespace solpole
