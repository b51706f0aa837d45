#pragma once

// Large-|t| pole lattice: leading-order positions, first-order corrections in
// the moving frames, and matching of tracked curves to family labels.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "solpole/tracker.hpp"

namespace solpole {

// z = x - k1^2 t, r = exp(k2 (k2^2 - k1^2) t)   (Slow)
// w = x - k2^2 t, s = exp(k1 (k2^2 - k1^2) t)   (Fast)
// with F(x, t) = H(z, r) = s^-2 I(w, s). Coordinates are taken relative to the
// interaction point of cfg, so for nonzero shifts x and t are translated first.
struct MovingFrame {
  SpeedClass kind = SpeedClass::Slow;
  SolitonConfig cfg;

  Complex coordinate(Complex x, double t) const;
  double parameter(double t) const;
  // H(z, r) for Slow, I(w, s) for Fast
  Complex eval(Complex coord, double param) const;
};

// Leading-order position of the family member at time t.
Complex predicted_pole(const SolitonConfig& cfg, const FamilyLabel& label, double t);

// dz/dr at r = 0 (Slow) or dw/ds at s = 0 (Fast) for t -> -inf labels. For t -> +inf
// labels, the coefficient c with x - predicted ~ c r(-t) (resp. s(-t)).
Complex tangent_slope(const SolitonConfig& cfg, const FamilyLabel& label);
// The same quantity with the phase factor as printed in the classical derivation;
// it has the right modulus and is off by a factor -i.
Complex tangent_slope_printed(const SolitonConfig& cfg, const FamilyLabel& label);
// tangent_slope times r or s at the given time: the first-order term of x - predicted.
Complex first_order_term(const SolitonConfig& cfg, const FamilyLabel& label, double t,
                         bool printed = false);

// The label's mirror under x -> -conj(x), t -> -t: same speed, index negated,
// opposite time direction.
FamilyLabel mirror_label(const FamilyLabel& label);

struct PolishedPole {
  Complex x;       // the zero of F near x_approx
  Complex offset;  // x - predicted, resolved in 100-digit arithmetic
  int iterations = 0;
};

// Newton in the label's moving frame in extended precision.
PolishedPole polish_pole(const SolitonConfig& cfg, const FamilyLabel& label, Complex x_approx,
                         double t);

// Time at which both r and s (or their reciprocals) fall below tol: the slow/fast
// coupling is then negligible at leading order.
double seed_time(const SolitonConfig& cfg, double tol = 1e-6);

struct Seed {
  FamilyLabel label;
  Complex x;
};

// Leading-order positions of all family members at time t whose imaginary part lies in
// (im_lo, im_hi]; the direction follows the sign of t - t0.
std::vector<Seed> asymptotic_seeds(const SolitonConfig& cfg, double t, double im_lo, double im_hi);

struct LadderPoint {
  double t = 0.0;
  double residual = 0.0;  // |x - predicted|
};

struct FamilyMatch {
  std::size_t curve = 0;
  FamilyLabel label;
  Complex endpoint;  // polished position at the first ladder time
  std::vector<LadderPoint> ladder;  // |t| = T, 2T, 4T, ... within the curve's span
  double tracked_gap = 0.0;         // |tracked - polished| at the first ladder time
  Complex tangent_ratio;            // offset / first-order term at the last ladder time
  Complex tangent_ratio_printed;
};

struct MatchReport {
  double T = 0.0;
  std::vector<FamilyMatch> matches;  // two per curve when the curve spans [-T, T]
  std::vector<std::size_t> unmatched;
  double max_residual = 0.0;  // over the residuals at |t| = T
  bool residuals_decrease = true;
};

// Assigns every curve a label at each end reached (t0 - T and/or t0 + T), nearest
// label by distance modulo the period in the commensurable case. Throws Error when
// two curves claim the same label.
MatchReport match_families(const std::vector<PoleCurve>& curves, const SolitonConfig& cfg,
                           double T);

nlohmann::ordered_json to_json(const MatchReport& report);

}  // namespace solpole
