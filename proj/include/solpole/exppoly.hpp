#pragma once

// F and G of a commensurable configuration as polynomials in y = exp(-x/lambda),
// with coefficients c * exp(sigma t) held exactly, and a global root finder for
// them at fixed t.

#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>
#include <json.hpp>

#include "solpole/config.hpp"

namespace solpole {

struct ExactComplex {
  Rational re;
  Rational im;
  bool is_zero() const { return re == 0 && im == 0; }
  friend bool operator==(const ExactComplex&, const ExactComplex&) = default;
};

// coef * exp(sigma t) * y^n
struct ExpTerm {
  int n = 0;
  ExactComplex coef;
  Rational sigma;
  friend bool operator==(const ExpTerm&, const ExpTerm&) = default;
};

class ExpPoly {
 public:
  // Sorts by (n, sigma), merges equal (n, sigma) pairs and drops zero coefficients.
  ExpPoly(std::vector<ExpTerm> terms, Rational lambda);

  const std::vector<ExpTerm>& terms() const { return terms_; }
  const Rational& lambda() const { return lambda_; }
  bool empty() const { return terms_.empty(); }
  int min_power() const;
  int max_power() const;

  // Coefficients of y^min_power .. y^max_power at time t, in extended precision.
  template <class BigC>
  std::vector<BigC> coefficients_at(double t) const;

  Complex eval(Complex y, double t) const;

 private:
  std::vector<ExpTerm> terms_;
  Rational lambda_;
};

// Requires exact commensurable wavenumbers and zero shifts; the variant is cfg.variant.
ExpPoly build_F_poly(const SolitonConfig& cfg);
ExpPoly build_G_poly(const SolitonConfig& cfg);
// The linear factors F = F1 * F2 (labelling as TwoSoliton::factor).
ExpPoly build_factor_poly(const SolitonConfig& cfg, int which);

struct Root {
  Complex y;
  int multiplicity = 1;
  double condition = 0.0;  // sum |c_n y^n| / |y^m p^(m)(y)/m!|
  double residual = 0.0;   // |p(y)| / sum |c_n y^n|
};

struct RootSet {
  double t = 0.0;
  int degree = 0;
  std::vector<Root> roots;  // sorted by (Im y, Re y)
  int total_multiplicity() const;
};

struct RootOptions {
  int digits = 50;  // 50 or 100
  int max_iterations = 500;
  double cluster_tolerance = 1e-6;  // relative, times (1 + |y|)
};

RootSet roots_at_time(const ExpPoly& poly, double t, const RootOptions& opts = {});
// Plain polynomial with ascending double coefficients.
RootSet polynomial_roots(const std::vector<Complex>& ascending, const RootOptions& opts = {});

// x = -lambda log y with Im x in (-lambda pi, lambda pi].
Complex y_to_x(Complex y, double lambda);

struct OraclePole {
  Complex x;
  int multiplicity = 1;
};

// All poles of u in the fundamental strip at time t, sorted by (Im x, Re x).
std::vector<OraclePole> oracle_poles(const SolitonConfig& cfg, double t,
                                     const RootOptions& opts = {});

nlohmann::ordered_json to_json(const Rational& r);
nlohmann::ordered_json to_json(const ExpPoly& p);
nlohmann::ordered_json to_json(const RootSet& r);

}  // namespace solpole
