#pragma once

// Checks on the zero set of F through its linear factors: real-line exclusion,
// the cosine relations at factor zeros, the sign of vertical pole motion, the
// vertical translation identities, and residues.
//
// Every factor is F1+ with f1, f2 replaced by a f1, b f2 (a, b = +-1):
//   F1+ (a, b) = (+, +)   F2+ (-, -)   F1- (+, -)   F2- (-, +)
// so the relations below hold with phases phi_j = k_j alpha + (0 or pi).

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "solpole/tracker.hpp"

namespace solpole {

// alpha = -Im x, A_j = |f_j(x, t)|, so f_j = A_j exp(i k_j alpha).
struct RealDecomp {
  double alpha = 0.0;
  double log_A1 = 0.0;
  double log_A2 = 0.0;
  double A1() const { return std::exp(log_A1); }
  double A2() const { return std::exp(log_A2); }
};

RealDecomp real_decomp(const SolitonConfig& cfg, Complex x, double t);

struct FactorPair {
  Complex F1;
  Complex F2;
};

// Unscaled F1, F2 for cfg's variant.
FactorPair factor_F(const SolitonConfig& cfg, Complex x, double t);

// Which factor (0 or 1) vanishes at x, judged by relative size.
int vanishing_factor(const SolitonConfig& cfg, Complex x, double t);

struct LineMinimum {
  double im = 0.0;
  double min_rel_F = 0.0;  // min over the line of |F| / (sum of |terms|)
  Complex argmin;
};

struct RealGrid {
  double lo = -20.0;
  double hi = 20.0;
  int n = 4001;
};

// Minimum of |F| along Im x = im, on the grid and then refined by Brent's method.
LineMinimum line_minimum(const SolitonConfig& cfg, double t, double im, const RealGrid& grid = {});
// The real axis, plus Im x = lambda pi in the commensurable case.
std::vector<LineMinimum> check_no_real_poles(const SolitonConfig& cfg, double t,
                                             const RealGrid& grid = {});

struct CosResiduals {
  double r12 = 0.0;  // (A2 - 1/A2) cos phi1 + (A1 - 1/A1) cos phi2
  double r2 = 0.0;   // (A1 + 1/A1) cos phi2 - sin(phi1 + phi2)/gamma + gamma sin(phi2 - phi1)
  double r1 = 0.0;   // (A2 + 1/A2) cos phi1 - sin(phi1 + phi2)/gamma - gamma sin(phi2 - phi1)
  double scale = 1.0;
  double cos_k1_alpha = 0.0;
  double cos_k2_alpha = 0.0;
  double max_relative() const;
};

// Requires x to be a zero of the given factor (relative 1e-8).
CosResiduals cos_identities_residual(const SolitonConfig& cfg, Complex x, double t, int which = 0);

struct VerticalSign {
  int predicted = 0;             // sign of (A1 - 1/A1) cos phi2, 0 inside the dead zone
  double predicted_value = 0.0;
  double measured = 0.0;         // Im x'(t) = Im(-d_t Q / d_x Q)
  int measured_sign() const;
  // inside either dead zone the comparison is inconclusive, not a violation
  bool agrees() const { return predicted == 0 || measured_sign() == 0 || predicted == measured_sign(); }
};

inline constexpr double kSignDeadZone = 1e-10;

// Requires a simple zero of the factor.
VerticalSign vertical_sign(const SolitonConfig& cfg, Complex x, double t, int which);

struct TranslationCheck {
  double theta = 0.0;
  double max_residual = 0.0;  // relative, over deterministic random probes
  int probes = 0;
};

// p1, p2 of opposite parity: F+(x - i theta, t) = F-(x, t) with theta = lambda pi.
TranslationCheck parity_translation_theta(const SolitonConfig& cfg, int probes = 100);

struct OddParityTranslation {
  TranslationCheck first;   // F1(x - i theta1, t) = 1 + g f1 + g f2 + f1 f2
  TranslationCheck second;  // F2(x - i theta2, t) = same
};

// p1, p2 odd with p2 - p1 (Plus) or p2 + p1 (Minus) divisible by 4.
OddParityTranslation odd_parity_translation(const SolitonConfig& cfg, int probes = 100);

struct Residue {
  Complex x;         // the pole after Newton polishing
  Complex value;     // 2 gamma G / F_x
  Complex contour;   // trapezoid rule on a circle around x
  double radius = 0.0;
};

// (1/2 pi i) of the integral of fn over the circle |z - center| = radius, trapezoid rule.
Complex contour_residue(const std::function<Complex(Complex)>& fn, Complex center, double radius,
                        int nodes = 256);

// Throws PreconditionError at a multiple zero or when no zero is near x_pole.
Residue residue_at_pole(const SolitonConfig& cfg, Complex x_pole, double t);

// Aggregates over tracked samples.
struct InvariantResult {
  std::string name;
  bool pass = true;
  bool checkable = true;
  std::size_t checked = 0;
  double worst = 0.0;
  std::optional<Complex> witness_x;
  std::optional<double> witness_t;
  std::string note;
};

// Sign law at every sample with t != t0 or Re x != x0; exceptional collisions excluded.
InvariantResult sign_law_over_curves(const SolitonConfig& cfg, const std::vector<PoleCurve>& curves);
// cos k1 alpha = cos k2 alpha = 0 at a zero only for p1, p2 odd and alpha an odd
// multiple of lambda pi/2.
InvariantResult cos_zero_over_curves(const SolitonConfig& cfg, const std::vector<PoleCurve>& curves);
// Cosine relations at every sample.
InvariantResult cos_identities_over_curves(const SolitonConfig& cfg,
                                           const std::vector<PoleCurve>& curves);

nlohmann::ordered_json to_json(const InvariantResult& r);

}  // namespace solpole
