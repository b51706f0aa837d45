#include "solpole/config.hpp"

#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>

namespace solpole {

std::string_view to_string(Variant v) { return v == Variant::Plus ? "plus" : "minus"; }

Variant parse_variant(std::string_view s) {
  if (s == "plus" || s == "+") return Variant::Plus;
  if (s == "minus" || s == "-") return Variant::Minus;
  throw PreconditionError("unknown variant '" + std::string(s) + "' (expected plus|minus)");
}

namespace {

bool is_integer_literal(std::string_view s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

double to_double(const Rational& q) { return q.convert_to<double>(); }

}  // namespace

Wavenumber parse_wavenumber(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw PreconditionError("empty wavenumber");
  const auto slash = s.find('/');
  if (slash != std::string::npos) {
    const auto num = s.substr(0, slash);
    const auto den = s.substr(slash + 1);
    if (!is_integer_literal(num) || !is_integer_literal(den))
      throw PreconditionError("malformed rational '" + s + "'");
    boost::multiprecision::cpp_int n(num), d(den);
    if (d == 0) throw PreconditionError("zero denominator in '" + s + "'");
    Rational q(n, d);
    return {to_double(q), q};
  }
  if (is_integer_literal(s)) {
    Rational q{boost::multiprecision::cpp_int(s)};
    return {to_double(q), q};
  }
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw PreconditionError("malformed wavenumber '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v))
    throw PreconditionError("malformed wavenumber '" + s + "'");
  return {v, std::nullopt};
}

SolitonConfig SolitonConfig::approximate(double k1, double k2, Variant v, double x1,
                                         double x2) {
  SolitonConfig cfg;
  cfg.k1 = k1;
  cfg.k2 = k2;
  cfg.variant = v;
  cfg.x1 = x1;
  cfg.x2 = x2;
  cfg.gamma = (k2 + k1) / (k2 - k1);
  cfg.validate();
  return cfg;
}

SolitonConfig SolitonConfig::exact(const Rational& k1, const Rational& k2, Variant v,
                                   double x1, double x2) {
  if (k1 <= 0 || k2 <= k1) throw PreconditionError("require 0 < k1 < k2");
  SolitonConfig cfg;
  cfg.k1 = to_double(k1);
  cfg.k2 = to_double(k2);
  cfg.variant = v;
  cfg.x1 = x1;
  cfg.x2 = x2;
  cfg.k1_exact = k1;
  cfg.k2_exact = k2;
  cfg.gamma = to_double(Rational((k2 + k1) / (k2 - k1)));

  const Rational ratio = k2 / k1;
  CommensurabilityInfo info;
  info.p1 = static_cast<int>(boost::multiprecision::denominator(ratio));
  info.p2 = static_cast<int>(boost::multiprecision::numerator(ratio));
  info.lambda_exact = Rational(info.p1) / k1;
  info.lambda = to_double(info.lambda_exact);
  cfg.comm = info;
  cfg.validate();
  return cfg;
}

SolitonConfig SolitonConfig::from_wavenumbers(const Wavenumber& k1, const Wavenumber& k2,
                                              Variant v, double x1, double x2) {
  if (k1.exact && k2.exact) return exact(*k1.exact, *k2.exact, v, x1, x2);
  return approximate(k1.value, k2.value, v, x1, x2);
}

SolitonConfig SolitonConfig::with_variant(Variant v) const {
  SolitonConfig c = *this;
  c.variant = v;
  return c;
}

double SolitonConfig::strip_scale() const {
  return comm ? comm->lambda * kPi : kPi / k1;
}

Rational SolitonConfig::gamma_exact() const {
  if (!is_exact()) throw PreconditionError("gamma_exact requires rational wavenumbers");
  return (*k2_exact + *k1_exact) / (*k2_exact - *k1_exact);
}

void SolitonConfig::validate() const {
  if (!(std::isfinite(k1) && std::isfinite(k2)) || !(k1 > 0.0) || !(k2 > k1))
    throw PreconditionError("require 0 < k1 < k2 (got k1=" + std::to_string(k1) +
                            ", k2=" + std::to_string(k2) + ")");
  if (!std::isfinite(x1) || !std::isfinite(x2))
    throw PreconditionError("spatial shifts must be finite");
  if (!(gamma > 1.0)) throw PreconditionError("gamma must exceed 1");
  if (comm) {
    if (std::gcd(comm->p1, comm->p2) != 1 || comm->p1 >= comm->p2 || comm->p1 <= 0)
      throw PreconditionError("commensurability data must satisfy gcd(p1,p2)=1, 0<p1<p2");
    if (k1_exact && k2_exact) {
      if (comm->lambda_exact * *k1_exact != comm->p1 ||
          comm->lambda_exact * *k2_exact != comm->p2)
        throw PreconditionError("lambda*k_j must equal p_j exactly");
    }
  }
}

std::string describe(const SolitonConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "k1=" << cfg.k1 << " k2=" << cfg.k2 << " variant=" << to_string(cfg.variant);
  if (cfg.comm) os << " p1/p2=" << cfg.comm->p1 << "/" << cfg.comm->p2;
  if (!cfg.has_zero_shifts()) os << " x1=" << cfg.x1 << " x2=" << cfg.x2;
  return os.str();
}

}  // namespace solpole
