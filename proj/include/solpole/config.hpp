#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace solpole {

using Complex = std::complex<double>;
using Rational = boost::multiprecision::cpp_rational;

inline constexpr double kPi = 3.14159265358979323846;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Exponent outside the representable range of double.
class RangeError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Plus: two positive solitons (u+). Minus: opposite signs, faster one positive (u-).
enum class Variant { Plus, Minus };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view s);

// k2/k1 = p2/p1 in lowest terms; lambda = p1/k1 = p2/k2. Imaginary period is 2*pi*lambda.
struct CommensurabilityInfo {
  int p1 = 0;
  int p2 = 0;
  Rational lambda_exact;
  double lambda = 0.0;
};

// A wavenumber as typed by the user: always a double, and an exact rational when
// it was written as an integer or "p/q".
struct Wavenumber {
  double value = 0.0;
  std::optional<Rational> exact;
};

Wavenumber parse_wavenumber(std::string_view text);

struct SolitonConfig {
  double k1 = 0.0;
  double k2 = 0.0;
  Variant variant = Variant::Minus;
  double x1 = 0.0;
  double x2 = 0.0;
  double gamma = 0.0;
  std::optional<Rational> k1_exact;
  std::optional<Rational> k2_exact;
  std::optional<CommensurabilityInfo> comm;

  // Approximate mode: no commensurability data, oracle-dependent code refuses.
  static SolitonConfig approximate(double k1, double k2, Variant v, double x1 = 0.0,
                                   double x2 = 0.0);
  // Exact mode: rational wavenumbers, commensurability derived exactly.
  static SolitonConfig exact(const Rational& k1, const Rational& k2, Variant v,
                             double x1 = 0.0, double x2 = 0.0);
  static SolitonConfig from_wavenumbers(const Wavenumber& k1, const Wavenumber& k2,
                                        Variant v, double x1 = 0.0, double x2 = 0.0);

  SolitonConfig with_variant(Variant v) const;

  // +1 for Minus, -1 for Plus: u+ follows from u- under f1 -> -f1.
  double sigma() const { return variant == Variant::Minus ? 1.0 : -1.0; }
  bool is_exact() const { return k1_exact.has_value() && k2_exact.has_value(); }
  bool has_zero_shifts() const { return x1 == 0.0 && x2 == 0.0; }
  // Vertical length scale of the pole lattice: lambda*pi when commensurable, pi/k1 otherwise.
  double strip_scale() const;
  Rational gamma_exact() const;

  void validate() const;
};

std::string describe(const SolitonConfig& cfg);

}  // namespace solpole
