#include "solpole/exppoly.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace solpole {

namespace mp = boost::multiprecision;
using Big50 = mp::cpp_bin_float_50;
using Big100 = mp::cpp_bin_float_100;
using BigC50 = mp::cpp_complex_50;
using BigC100 = mp::cpp_complex_100;

namespace {

template <class R>
R to_big(const Rational& q) {
  return R(mp::numerator(q)) / R(mp::denominator(q));
}

struct ExactMonomial {
  ExactComplex coef;
  int a = 0;
  int b = 0;
};

void require_oracle_cfg(const SolitonConfig& cfg) {
  cfg.validate();
  if (!cfg.comm || !cfg.is_exact())
    throw PreconditionError(
        "polynomial form needs exact commensurable wavenumbers (write k as an integer or p/q)");
  if (!cfg.has_zero_shifts())
    throw PreconditionError("polynomial form needs x1 = x2 = 0 (coefficients would not be rational)");
}

ExpPoly assemble(const SolitonConfig& cfg, const std::vector<ExactMonomial>& monos) {
  const auto& c = *cfg.comm;
  const Rational k1c = *cfg.k1_exact * *cfg.k1_exact * *cfg.k1_exact;
  const Rational k2c = *cfg.k2_exact * *cfg.k2_exact * *cfg.k2_exact;
  std::vector<ExpTerm> terms;
  for (const auto& m : monos)
    terms.push_back({m.a * c.p1 + m.b * c.p2, m.coef, m.a * k1c + m.b * k2c});
  return ExpPoly(std::move(terms), c.lambda_exact);
}

ExactComplex make_real(const Rational& r) { return {r, Rational(0)}; }
ExactComplex make_imag(const Rational& r) { return {Rational(0), r}; }

}  // namespace

ExpPoly::ExpPoly(std::vector<ExpTerm> terms, Rational lambda) : lambda_(std::move(lambda)) {
  if (lambda_ <= 0) throw PreconditionError("ExpPoly: lambda must be positive");
  std::map<std::pair<int, Rational>, ExactComplex> merged;
  for (auto& t : terms) {
    auto& slot = merged[{t.n, t.sigma}];
    slot.re += t.coef.re;
    slot.im += t.coef.im;
  }
  for (auto& [key, coef] : merged)
    if (!coef.is_zero()) terms_.push_back({key.first, coef, key.second});
}

int ExpPoly::min_power() const {
  if (terms_.empty()) throw PreconditionError("ExpPoly: empty polynomial");
  return terms_.front().n;
}

int ExpPoly::max_power() const {
  if (terms_.empty()) throw PreconditionError("ExpPoly: empty polynomial");
  return terms_.back().n;
}

template <class BigC>
std::vector<BigC> ExpPoly::coefficients_at(double t) const {
  using R = typename BigC::value_type;
  const int lo = min_power();
  std::vector<BigC> out(static_cast<std::size_t>(max_power() - lo + 1), BigC(0));
  const R tt(t);
  for (const auto& term : terms_) {
    const R e = exp(to_big<R>(term.sigma) * tt);
    out[static_cast<std::size_t>(term.n - lo)] +=
        BigC(to_big<R>(term.coef.re) * e, to_big<R>(term.coef.im) * e);
  }
  return out;
}

template std::vector<BigC50> ExpPoly::coefficients_at<BigC50>(double) const;
template std::vector<BigC100> ExpPoly::coefficients_at<BigC100>(double) const;

Complex ExpPoly::eval(Complex y, double t) const {
  const auto c = coefficients_at<BigC50>(t);
  const BigC50 yy(y.real(), y.imag());
  BigC50 acc(0);
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * yy + *it;
  for (int i = 0; i < std::abs(min_power()); ++i) acc = min_power() > 0 ? acc * yy : acc / yy;
  return {static_cast<double>(acc.real()), static_cast<double>(acc.imag())};
}

ExpPoly build_F_poly(const SolitonConfig& cfg) {
  require_oracle_cfg(cfg);
  const Rational s = cfg.variant == Variant::Minus ? 1 : -1;
  const Rational g = cfg.gamma_exact();
  const Rational g2 = g * g;
  return assemble(cfg, {{make_real(Rational(1)), 0, 0},
                        {make_real((2 - 2 * g2) * s), 1, 1},
                        {make_real(Rational(1)), 2, 2},
                        {make_real(g2), 2, 0},
                        {make_real(g2), 0, 2}});
}

ExpPoly build_G_poly(const SolitonConfig& cfg) {
  require_oracle_cfg(cfg);
  const Rational s = cfg.variant == Variant::Minus ? 1 : -1;
  const Rational& k1 = *cfg.k1_exact;
  const Rational& k2 = *cfg.k2_exact;
  return assemble(cfg, {{make_real(-k1 * s), 1, 0},
                        {make_real(-k1 * s), 1, 2},
                        {make_real(k2), 0, 1},
                        {make_real(k2), 2, 1}});
}

ExpPoly build_factor_poly(const SolitonConfig& cfg, int which) {
  require_oracle_cfg(cfg);
  if (which != 0 && which != 1) throw PreconditionError("factor index must be 0 or 1");
  const Rational s = cfg.variant == Variant::Minus ? 1 : -1;
  const Rational g = cfg.gamma_exact();
  // qa = 1 + i g phi1 - i g f2 + phi1 f2 is F1 for Minus and F2 for Plus
  const bool qa = (which == 0) == (cfg.variant == Variant::Minus);
  const Rational sg = qa ? 1 : -1;
  return assemble(cfg, {{make_real(Rational(1)), 0, 0},
                        {make_imag(sg * g * s), 1, 0},
                        {make_imag(-sg * g), 0, 1},
                        {make_real(s), 1, 1}});
}

int RootSet::total_multiplicity() const {
  int n = 0;
  for (const auto& r : roots) n += r.multiplicity;
  return n;
}

namespace {

template <class C>
struct Poly {
  using R = typename C::value_type;
  std::vector<C> a;  // ascending, a.front() != 0, a.back() != 0

  int degree() const { return static_cast<int>(a.size()) - 1; }

  // p^(j)(z) / j!
  C taylor(int j, const C& z) const {
    C acc(0);
    for (int n = degree(); n >= j; --n) acc = acc * z + a[n] * R(binom(n, j));
    return acc;
  }
  // sum_n |a_n| C(n, j) |z|^(n-j)
  R magnitude(int j, const R& r) const {
    R acc(0);
    for (int n = degree(); n >= j; --n) acc = acc * r + abs(a[n]) * R(binom(n, j));
    return acc;
  }
  static double binom(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
  }
};

// Initial radii from the upper convex hull of (n, log|a_n|).
template <class C>
std::vector<C> initial_points(const Poly<C>& p) {
  using R = typename C::value_type;
  const int d = p.degree();
  std::vector<int> idx;
  std::vector<double> lg;
  for (int n = 0; n <= d; ++n) {
    if (p.a[n] == C(0)) continue;
    idx.push_back(n);
    lg.push_back(static_cast<double>(log(abs(p.a[n]))));
  }
  std::vector<std::size_t> hull;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    while (hull.size() >= 2) {
      const auto i1 = hull[hull.size() - 2], i2 = hull.back();
      const double cross = (idx[i2] - idx[i1]) * (lg[i] - lg[i1]) - (lg[i2] - lg[i1]) * (idx[i] - idx[i1]);
      if (cross >= 0) hull.pop_back();
      else break;
    }
    hull.push_back(i);
  }
  std::vector<C> pts;
  for (std::size_t h = 0; h + 1 < hull.size(); ++h) {
    const int n0 = idx[hull[h]], n1 = idx[hull[h + 1]];
    const int cnt = n1 - n0;
    const double logr = (lg[hull[h]] - lg[hull[h + 1]]) / cnt;
    const double offset = 0.7 + 1.3 * static_cast<double>(h);
    for (int k = 0; k < cnt; ++k) {
      const double ang = offset + 2.0 * kPi * k / cnt;
      const R r = exp(R(logr));
      pts.emplace_back(r * R(std::cos(ang)), r * R(std::sin(ang)));
    }
  }
  return pts;
}

template <class C>
std::vector<Root> solve(const Poly<C>& p, const RootOptions& opts) {
  using R = typename C::value_type;
  const int d = p.degree();
  if (d == 0) return {};
  const R eps = std::numeric_limits<R>::epsilon();
  std::vector<C> z;
  if (d == 1) {
    z.push_back(-p.a[0] / p.a[1]);
  } else {
    z = initial_points(p);
    std::vector<bool> done(static_cast<std::size_t>(d), false);
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
      bool all = true;
      for (int k = 0; k < d; ++k) {
        if (done[k]) continue;
        C val(0), der(0);
        for (int n = d; n >= 0; --n) {
          der = der * z[k] + val;
          val = val * z[k] + p.a[n];
        }
        if (abs(val) <= R(8 * d) * eps * p.magnitude(0, abs(z[k]))) {
          done[k] = true;
          continue;
        }
        all = false;
        C s(0);
        for (int j = 0; j < d; ++j)
          if (j != k) s += C(1) / (z[k] - z[j]);
        const C w = val / der;
        z[k] -= w / (C(1) - w * s);
      }
      if (all) break;
    }
    if (it == opts.max_iterations) {
      double worst = 0.0;
      for (int k = 0; k < d; ++k)
        worst = std::max(worst, static_cast<double>(abs(p.taylor(0, z[k])) /
                                                    p.magnitude(0, abs(z[k]))));
      std::ostringstream os;
      os << "root finder did not converge in " << opts.max_iterations
         << " iterations; worst relative residual " << worst;
      throw ConvergenceError(os.str());
    }
  }

  // clusters by single linkage
  std::vector<int> parent(static_cast<std::size_t>(d));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      if (abs(z[i] - z[j]) < R(opts.cluster_tolerance) * (1 + abs(z[i]))) parent[find(i)] = find(j);
  std::map<int, std::vector<int>> clusters;
  for (int i = 0; i < d; ++i) clusters[find(i)].push_back(i);

  const R vanish = sqrt(eps);
  auto make_root = [&](const C& c, int m) {
    const R az = abs(c);
    const R s0 = p.magnitude(0, az);
    Root r;
    r.y = {static_cast<double>(c.real()), static_cast<double>(c.imag())};
    r.multiplicity = m;
    r.residual = static_cast<double>(abs(p.taylor(0, c)) / s0);
    const R lead = abs(p.taylor(m, c)) * pow(az, m);
    r.condition = lead > 0 ? static_cast<double>(s0 / lead) : HUGE_VAL;
    return r;
  };

  std::vector<Root> out;
  for (auto& [rep, members] : clusters) {
    const int m = static_cast<int>(members.size());
    if (m == 1) {
      C c = z[members[0]];
      for (int i = 0; i < 3; ++i) {
        const C der = p.taylor(1, c);
        if (der == C(0)) break;
        c -= p.taylor(0, c) / der;
      }
      out.push_back(make_root(c, 1));
      continue;
    }
    C c(0);
    for (int i : members) c += z[i];
    c /= R(m);
    // the cluster center is a simple zero of p^(m-1)
    for (int i = 0; i < 60; ++i) {
      const C der = p.taylor(m, c);
      if (der == C(0)) break;
      const C step = p.taylor(m - 1, c) / (der * R(m));
      c -= step;
      if (abs(step) <= eps * (1 + abs(c))) break;
    }
    bool confirmed = true;
    const R az = abs(c);
    for (int j = 0; j < m && confirmed; ++j)
      confirmed = abs(p.taylor(j, c)) <= vanish * p.magnitude(j, az);
    confirmed = confirmed && abs(p.taylor(m, c)) > vanish * p.magnitude(m, az);
    if (confirmed) {
      out.push_back(make_root(c, m));
    } else {
      for (int i : members) out.push_back(make_root(z[i], 1));
    }
  }
  return out;
}

void sort_roots(std::vector<Root>& roots) {
  std::sort(roots.begin(), roots.end(), [](const Root& a, const Root& b) {
    if (a.y.imag() != b.y.imag()) return a.y.imag() < b.y.imag();
    return a.y.real() < b.y.real();
  });
}

template <class C>
RootSet roots_from(std::vector<C> a, int shift, double t, const RootOptions& opts) {
  // a are the coefficients of y^shift .. ; zero low coefficients become a root at y = 0
  RootSet rs;
  rs.t = t;
  while (!a.empty() && a.back() == C(0)) a.pop_back();
  if (a.empty()) throw PreconditionError("roots requested for the zero polynomial");
  int lead_zeros = 0;
  while (a[static_cast<std::size_t>(lead_zeros)] == C(0)) ++lead_zeros;
  a.erase(a.begin(), a.begin() + lead_zeros);
  const int zero_mult = std::max(0, shift + lead_zeros);
  rs.degree = zero_mult + static_cast<int>(a.size()) - 1;
  if (rs.degree < 1) throw PreconditionError("roots requested for a constant polynomial");
  rs.roots = solve(Poly<C>{std::move(a)}, opts);
  if (zero_mult > 0) rs.roots.push_back({Complex(0.0, 0.0), zero_mult, 0.0, 0.0});
  sort_roots(rs.roots);
  return rs;
}

}  // namespace

RootSet roots_at_time(const ExpPoly& poly, double t, const RootOptions& opts) {
  if (poly.empty()) throw PreconditionError("roots requested for the zero polynomial");
  if (opts.digits > 50) return roots_from(poly.coefficients_at<BigC100>(t), poly.min_power(), t, opts);
  return roots_from(poly.coefficients_at<BigC50>(t), poly.min_power(), t, opts);
}

RootSet polynomial_roots(const std::vector<Complex>& ascending, const RootOptions& opts) {
  std::vector<BigC50> a;
  for (const auto& c : ascending) a.emplace_back(c.real(), c.imag());
  return roots_from(std::move(a), 0, 0.0, opts);
}

Complex y_to_x(Complex y, double lambda) {
  if (y == Complex(0.0, 0.0)) throw PreconditionError("y_to_x: y = 0 has no preimage");
  Complex x = -lambda * std::log(y);
  if (x.imag() <= -lambda * kPi) x += Complex(0.0, 2.0 * lambda * kPi);
  return x;
}

std::vector<OraclePole> oracle_poles(const SolitonConfig& cfg, double t, const RootOptions& opts) {
  const auto rs = roots_at_time(build_F_poly(cfg), t, opts);
  std::vector<OraclePole> out;
  for (const auto& r : rs.roots) out.push_back({y_to_x(r.y, cfg.comm->lambda), r.multiplicity});
  std::sort(out.begin(), out.end(), [](const OraclePole& a, const OraclePole& b) {
    if (a.x.imag() != b.x.imag()) return a.x.imag() < b.x.imag();
    return a.x.real() < b.x.real();
  });
  return out;
}

nlohmann::ordered_json to_json(const Rational& r) {
  return {{"num", mp::numerator(r).str()}, {"den", mp::denominator(r).str()}};
}

nlohmann::ordered_json to_json(const ExpPoly& p) {
  nlohmann::ordered_json terms = nlohmann::ordered_json::array();
  for (const auto& t : p.terms())
    terms.push_back({{"n", t.n},
                     {"coef", {{"re", to_json(t.coef.re)}, {"im", to_json(t.coef.im)}}},
                     {"sigma", to_json(t.sigma)}});
  return {{"lambda", to_json(p.lambda())}, {"terms", terms}};
}

nlohmann::ordered_json to_json(const RootSet& r) {
  nlohmann::ordered_json roots = nlohmann::ordered_json::array();
  for (const auto& x : r.roots)
    roots.push_back({{"re", x.y.real()},
                     {"im", x.y.imag()},
                     {"multiplicity", x.multiplicity},
                     {"condition", x.condition},
                     {"residual", x.residual}});
  return {{"t", r.t}, {"degree", r.degree}, {"roots", roots}};
}

}  // namespace solpole
