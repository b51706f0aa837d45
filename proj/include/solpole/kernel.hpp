#pragma once

// Closed-form evaluation of the mKdV two-soliton u+/u- and its building blocks
// at complex x and real t.
//
// With f_j = exp(-k_j (x - x_j) + k_j^3 t) and phi1 = sigma*f1 (sigma = +1 for
// Minus, -1 for Plus):
//
//   g = gamma (phi1 - f2) / (1 + phi1 f2)
//   F = (1 + phi1 f2)^2 + gamma^2 (phi1 - f2)^2
//   G = -k1 phi1 (1 + f2^2) + k2 f2 (1 + phi1^2)
//   u = 2 gamma G / F
//
// F and G are only ever evaluated projectively: every monomial f1^a f2^b is
// divided by exp(log_scale), log_scale being the largest real exponent among
// the monomials of F, so that |t| well beyond the overflow threshold of
// exp(k2^3 t) stays usable.

#include <array>
#include <variant>
#include <vector>

#include "solpole/config.hpp"

namespace solpole {

struct PoleMarker {
  Complex at;
  double abs_denominator = 0.0;  // scaled |F| (or |1 + phi1 f2| for g) at the point
};

using PointValue = std::variant<Complex, PoleMarker>;

inline bool is_pole(const PointValue& v) { return std::holds_alternative<PoleMarker>(v); }
// Throws PreconditionError on a PoleMarker.
Complex value_of(const PointValue& v);

namespace detail {

// coef * f1^a * f2^b
struct Monomial {
  Complex coef;
  int a = 0;
  int b = 0;
};

class ExpCombination {
 public:
  ExpCombination() = default;
  explicit ExpCombination(std::vector<Monomial> terms) : terms_(std::move(terms)) {}

  // d^nx/dx^nx d^nt/dt^nt of the combination, times exp(-log_scale).
  Complex eval(Complex e1, Complex e2, double log_scale, double k1, double k2, int nx = 0,
               int nt = 0) const;
  // sum of |monomials| times exp(-log_scale).
  double abs_sum(Complex e1, Complex e2, double log_scale) const;
  double max_log(Complex e1, Complex e2) const;
  const std::vector<Monomial>& terms() const { return terms_; }

 private:
  std::vector<Monomial> terms_;
};

}  // namespace detail

// F and G divided by exp(log_scale).
struct ScaledFG {
  Complex F;
  Complex G;
  double log_scale = 0.0;
};

struct FGValue {
  Complex F;
  Complex G;
};

// u and its first two x derivatives at a regular point.
struct UJet {
  Complex u;
  Complex ux;
  Complex uxx;
};

struct EqgResidual {
  Complex value;  // left side of (1+g^2)(g_t+g_xxx) + 6 g_x (g_x^2 - g g_xx)
  double scale;   // magnitude of the largest of the two summands
};

// The bound evaluator: precomputes the monomial tables of F, G and the two
// linear factors for one configuration. Pure and immutable after construction.
class TwoSoliton {
 public:
  explicit TwoSoliton(SolitonConfig cfg);

  const SolitonConfig& config() const { return cfg_; }

  // exponent of f_j at (x, t), j in {1, 2}
  Complex exponent(int j, Complex x, double t) const;
  double log_scale(Complex x, double t) const;

  ScaledFG scaled_FG(Complex x, double t) const;
  // derivative of F (or G) at a caller-fixed log_scale
  Complex F(Complex x, double t, double log_scale, int nx = 0, int nt = 0) const;
  Complex G(Complex x, double t, double log_scale, int nx = 0, int nt = 0) const;
  double F_magnitude(Complex x, double t, double log_scale) const;

  // Linear factors with F = factor(0) * factor(1), in the labelling F1, F2 of the
  // factorization (F1+ = 1 + i g f1 + i g f2 - f1 f2, etc.). Scaled by exp(-log_scale/2).
  Complex factor(int which, Complex x, double t, double log_scale, int nx = 0,
                 int nt = 0) const;

  // True when |F| is below the scale-aware pole tolerance at (x, t).
  bool is_pole_point(Complex x, double t) const;

  PointValue u(Complex x, double t) const;
  UJet u_jet(Complex x, double t) const;

 private:
  SolitonConfig cfg_;
  detail::ExpCombination F_, G_;
  std::array<detail::ExpCombination, 2> factors_;
};

inline constexpr double kPoleTolerance = 1e-12;

Complex eval_f(const SolitonConfig& cfg, int j, Complex x, double t);
PointValue eval_g(const SolitonConfig& cfg, Complex x, double t);
FGValue eval_FG(const SolitonConfig& cfg, Complex x, double t);
PointValue eval_u(const SolitonConfig& cfg, Complex x, double t);
// Alternate route: gamma (u2 -/+ u1) / D with the one-soliton profiles u_j.
PointValue eval_u_sumform(const SolitonConfig& cfg, Complex x, double t);
// -k sech(-k (x - x0) + k^3 t)
PointValue eval_one_soliton(double k, double x0, Complex x, double t);

struct InteractionPoint {
  double x0 = 0.0;
  double t0 = 0.0;
};

// Interaction center/time for the form in which the shifts enter as
//   g~ = -(f~1 + f~2)/(1 - gamma^-2 f~1 f~2),  f~j = exp(-k_j (x - x_j) + k_j^3 t),
// i.e. g~(x, t) = g(x - x0, t - t0).
InteractionPoint interaction_point_unnormalized(double k1, double k2, double x1, double x2);
// The interaction point of the solution evaluated by this library for cfg
// (whose f_j carry the normalization gamma^-1); (0, 0) when the shifts vanish.
InteractionPoint interaction_point(const SolitonConfig& cfg);
// g~ of the unnormalized form above, for the translation identity.
PointValue eval_g_unnormalized(double k1, double k2, Variant v, double x1, double x2,
                               Complex x, double t);

EqgResidual eqg_residual(const SolitonConfig& cfg, Complex x, double t);

// Centered finite-difference residual of u_t + u_xxx + 6 u^2 u_x at (x, t), with
// stencil steps taken along the real direction. Second order in h.
Complex pde_residual(const SolitonConfig& cfg, Complex x, double t, double h);
Complex pde_residual_one_soliton(double k, double x0, Complex x, double t, double h);

}  // namespace solpole
