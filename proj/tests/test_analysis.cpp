#include "doctest.h"
#include "solpole/analysis.hpp"
#include "solpole/asymptotics.hpp"
#include "solpole/exppoly.hpp"
#include "test_support.hpp"

using namespace solpole;
using solpole::testing::exact_cfg;
using solpole::testing::rel_err;

namespace {

double wrapped(Complex a, Complex b, double strip) { return std::abs(wrap_to_strip(a - b, strip)); }

// nearest oracle pole distance modulo the period
double nearest(const std::vector<OraclePole>& poles, Complex x, double strip) {
  double best = HUGE_VAL;
  for (const auto& p : poles) best = std::min(best, wrapped(p.x, x, strip));
  return best;
}

}  // namespace

TEST_CASE("real decomposition reconstructs f_j") {
  solpole::testing::PointSampler rng(3);
  const auto cfg = exact_cfg(1, 2, Variant::Minus);
  for (int i = 0; i < 200; ++i) {
    const Complex x = rng.x();
    const double t = rng.t();
    const auto d = real_decomp(cfg, x, t);
    CHECK(d.A1() > 0.0);
    CHECK(rel_err(d.A1() * std::exp(Complex(0.0, cfg.k1 * d.alpha)), eval_f(cfg, 1, x, t)) < 1e-12);
    CHECK(rel_err(d.A2() * std::exp(Complex(0.0, cfg.k2 * d.alpha)), eval_f(cfg, 2, x, t)) < 1e-12);
  }
}

TEST_CASE("factorization of F") {
  const auto plus = exact_cfg(1, 2, Variant::Plus);
  const double g = plus.gamma;
  const auto f0 = factor_F(plus, Complex(0.0), 0.0);
  CHECK(std::abs(f0.F1 - Complex(0.0, 2 * g)) < 1e-14);
  CHECK(std::abs(f0.F2 - Complex(0.0, -2 * g)) < 1e-14);
  CHECK(std::abs(f0.F1 * f0.F2 - 4 * g * g) < 1e-13);

  solpole::testing::PointSampler rng(5);
  for (auto cfg : {plus, exact_cfg(2, 7, Variant::Minus),
                   SolitonConfig::approximate(0.8, 1.9, Variant::Minus)}) {
    for (int i = 0; i < 1000; ++i) {
      const Complex x = rng.x();
      const double t = rng.t();
      const auto f = factor_F(cfg, x, t);
      CHECK(rel_err(f.F1 * f.F2, eval_FG(cfg, x, t).F) < 1e-12);
    }
  }
  // zeros of F1 and F2 are conjugate
  for (auto cfg : {plus, exact_cfg(1, 3, Variant::Minus)}) {
    for (const auto& p : oracle_poles(cfg, 0.37)) {
      const int w = vanishing_factor(cfg, p.x, 0.37);
      const TwoSoliton s(cfg);
      const double ls = s.log_scale(p.x, 0.37);
      const double scale = std::exp(-0.5 * ls) * (1 + std::exp(s.exponent(1, p.x, 0.37).real()) +
                                                   std::exp(s.exponent(2, p.x, 0.37).real())) * 4;
      CHECK(std::abs(s.factor(w, p.x, 0.37, ls)) < 1e-10 * scale);
      CHECK(std::abs(s.factor(1 - w, std::conj(p.x), 0.37, ls)) < 1e-10 * scale);
    }
  }
}

TEST_CASE("no zeros on Im x = 0 or Im x = lambda pi") {
  const auto cfg = exact_cfg(1, 5, Variant::Minus);
  const auto lines = check_no_real_poles(cfg, 0.0);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0].im == 0.0);
  CHECK(lines[1].im == doctest::Approx(kPi));
  for (const auto& l : lines) CHECK(l.min_rel_F > 1e-3);
  // the exceptional point on Im x = pi/2
  const auto half = line_minimum(cfg, 0.0, kPi / 2);
  CHECK(half.min_rel_F < 1e-12);
  CHECK(std::abs(half.argmin - Complex(0.0, kPi / 2)) < 1e-3);
  for (double t : {-1.0, 0.3, 2.0})
    for (auto v : {Variant::Plus, Variant::Minus})
      for (const auto& l : check_no_real_poles(exact_cfg(2, 3, v), t)) CHECK(l.min_rel_F > 1e-6);
}

TEST_CASE("cosine relations at factor zeros") {
  for (auto cfg : {exact_cfg(1, 2, Variant::Plus), exact_cfg(1, 2, Variant::Minus),
                   exact_cfg(2, 5, Variant::Plus), exact_cfg(1, 5, Variant::Plus)}) {
    for (double t : {-0.8, -0.1, 0.25, 1.1})
      for (const auto& p : oracle_poles(cfg, t)) {
        const auto r = cos_identities_residual(cfg, p.x, t, vanishing_factor(cfg, p.x, t));
        CHECK(r.max_relative() < 1e-8);
        // A1 = A2 = 1 would force t = 0
        const auto d = real_decomp(cfg, p.x, t);
        CHECK_FALSE((std::abs(d.log_A1) < 1e-9 && std::abs(d.log_A2) < 1e-9));
      }
  }
  // horizontal poles of the KdV-reducible (1, 5) Plus on Im x = +-pi/2
  const auto kdv = exact_cfg(1, 5, Variant::Plus);
  int on_line = 0;
  for (const auto& p : oracle_poles(kdv, 0.3)) {
    const auto r = cos_identities_residual(kdv, p.x, 0.3, vanishing_factor(kdv, p.x, 0.3));
    if (std::abs(r.cos_k1_alpha) < 1e-8) {
      ++on_line;
      CHECK(std::abs(r.cos_k2_alpha) < 1e-8);
    }
  }
  CHECK(on_line >= 2);
  // at t = 0 the pole on the imaginary axis has A1 = A2 = 1
  const auto cfg = exact_cfg(1, 2, Variant::Plus);
  int axis = 0;
  for (const auto& p : oracle_poles(cfg, 0.0))
    if (std::abs(p.x.real()) < 1e-9) {
      ++axis;
      const auto d = real_decomp(cfg, p.x, 0.0);
      CHECK(std::abs(d.log_A1) < 1e-9);
      CHECK(std::abs(d.log_A2) < 1e-9);
    }
  CHECK(axis > 0);
  CHECK_THROWS_AS(cos_identities_residual(cfg, Complex(0.1, 0.2), 0.0), PreconditionError);
}

TEST_CASE("vertical sign law") {
  for (auto cfg : {exact_cfg(1, 2, Variant::Plus), exact_cfg(1, 2, Variant::Minus),
                   exact_cfg(2, 3, Variant::Plus)}) {
    const auto curves = track_all(cfg, -2.0, 2.0);
    const auto res = sign_law_over_curves(cfg, curves);
    CHECK(res.pass);
    CHECK(res.checked > 100);

    // measured slope against a finite difference of the tracked curve
    const auto& c = curves[1];
    const double t = 0.7, h = 1e-4;
    const Complex xa = track_curve(cfg, c.at(t), t, t - h).front().x;
    const Complex x0 = track_curve(cfg, xa, t - h, t).back().x;
    const Complex xb = track_curve(cfg, x0, t, t + h).back().x;
    const auto v = vertical_sign(cfg, x0, t, vanishing_factor(cfg, x0, t));
    CHECK(v.measured == doctest::Approx((xb.imag() - xa.imag()) / (2 * h)).epsilon(1e-5));
    CHECK(v.predicted != 0);
    CHECK(v.predicted == v.measured_sign());
  }
  // at t = 0 the pole on the imaginary axis: predicted sign 0
  const auto cfg = exact_cfg(1, 2, Variant::Plus);
  for (const auto& p : oracle_poles(cfg, 0.0))
    if (std::abs(p.x.real()) < 1e-9)
      CHECK(vertical_sign(cfg, p.x, 0.0, vanishing_factor(cfg, p.x, 0.0)).predicted == 0);

  // exceptional: the linear branch and the real cube-root branch move along Im x = pi/2
  const auto exc = exact_cfg(1, 5, Variant::Minus);
  int horizontal = 0;
  for (const auto& p : oracle_poles(exc, -0.01)) {
    if (std::abs(p.x.imag() - kPi / 2) > 1e-9) continue;
    ++horizontal;
    const auto v = vertical_sign(exc, p.x, -0.01, vanishing_factor(exc, p.x, -0.01));
    CHECK(v.predicted == 0);
    CHECK(std::abs(v.measured) < 1e-8);
  }
  CHECK(horizontal == 2);

  // incommensurable: curves seeded from the asymptotics
  const auto irr = SolitonConfig::approximate(1.0, std::sqrt(2.0), Variant::Plus);
  std::vector<PoleCurve> curves;
  const double ts = seed_time(irr);
  for (const auto& sd : asymptotic_seeds(irr, ts, -kPi, kPi))
    curves.push_back(track_curve(irr, sd.x, ts, 3.0));
  REQUIRE(curves.size() >= 4);
  const auto res = sign_law_over_curves(irr, curves);
  CHECK(res.pass);
  CHECK(cos_zero_over_curves(irr, curves).pass);
}

TEST_CASE("cos k1 alpha = 0 only on the odd lattice") {
  const auto cfg = exact_cfg(1, 2, Variant::Plus);
  const auto r = cos_zero_over_curves(cfg, track_all(cfg, -1.0, 1.0));
  CHECK(r.pass);
  CHECK(r.note.rfind("0 samples", 0) == 0);
  const auto kdv = exact_cfg(1, 5, Variant::Plus);
  const auto rk = cos_zero_over_curves(kdv, track_all(kdv, 0.1, 0.5));
  CHECK(rk.pass);
  CHECK(rk.note.rfind("0 samples", 0) != 0);
  CHECK(cos_identities_over_curves(kdv, track_all(kdv, 0.1, 0.5)).pass);
}

TEST_CASE("mixed parity: u- poles are u+ poles translated by i lambda pi") {
  const auto cfg = exact_cfg(1, 2, Variant::Plus);
  const auto tr = parity_translation_theta(cfg);
  CHECK(tr.theta == doctest::Approx(kPi));
  CHECK(tr.max_residual < 1e-10);
  CHECK(tr.probes == 100);
  // explicit probe
  const auto fp = eval_FG(cfg, Complex(0.3, 0.1) - Complex(0.0, tr.theta), 0.2).F;
  const auto fm = eval_FG(cfg.with_variant(Variant::Minus), Complex(0.3, 0.1), 0.2).F;
  CHECK(rel_err(fp, fm) < 1e-12);
  // e^{i k1 theta} = -1, e^{i k2 theta} = 1
  CHECK(std::abs(std::exp(Complex(0.0, cfg.k1 * tr.theta)) + 1.0) < 1e-14);
  CHECK(std::abs(std::exp(Complex(0.0, cfg.k2 * tr.theta)) - 1.0) < 1e-14);

  for (auto c : {exact_cfg(2, 3, Variant::Minus), exact_cfg(3, 4, Variant::Plus),
                 SolitonConfig::exact(Rational(2, 3), Rational(4, 3), Variant::Plus)}) {
    const auto r = parity_translation_theta(c);
    CHECK(r.max_residual < 1e-10);
    // pole sets match after translation
    const double strip = c.strip_scale();
    const auto pp = oracle_poles(c.with_variant(Variant::Plus), 0.4);
    const auto pm = oracle_poles(c.with_variant(Variant::Minus), 0.4);
    REQUIRE(pp.size() == pm.size());
    for (const auto& p : pp) CHECK(nearest(pm, p.x + Complex(0.0, r.theta), strip) < 1e-9);
  }
  CHECK_THROWS_AS(parity_translation_theta(exact_cfg(1, 3, Variant::Plus)), PreconditionError);
  CHECK_THROWS_AS(parity_translation_theta(SolitonConfig::approximate(1, 2, Variant::Plus)),
                  PreconditionError);
}

TEST_CASE("odd parity: factors translate to the KdV form") {
  const auto m13 = exact_cfg(1, 3, Variant::Minus);
  const auto r = odd_parity_translation(m13);
  CHECK(r.first.max_residual < 1e-10);
  CHECK(r.second.max_residual < 1e-10);
  // F1-: f1 -> -i f1, f2 -> i f2
  CHECK(std::abs(std::exp(Complex(0.0, m13.k1 * r.first.theta)) - Complex(0, -1)) < 1e-14);
  CHECK(std::abs(std::exp(Complex(0.0, m13.k2 * r.first.theta)) - Complex(0, 1)) < 1e-14);

  // p2 - p1 = 4: the Plus variant reduces
  const auto p15 = odd_parity_translation(exact_cfg(1, 5, Variant::Plus));
  CHECK(p15.first.max_residual < 1e-10);
  CHECK(p15.second.max_residual < 1e-10);
  for (auto c : {exact_cfg(3, 7, Variant::Plus), exact_cfg(3, 5, Variant::Minus),
                 SolitonConfig::exact(Rational(1, 2), Rational(5, 2), Variant::Plus)}) {
    const auto o = odd_parity_translation(c);
    CHECK(o.first.max_residual < 1e-10);
    CHECK(o.second.max_residual < 1e-10);
  }

  CHECK_THROWS_AS(odd_parity_translation(exact_cfg(1, 5, Variant::Minus)), PreconditionError);
  CHECK_THROWS_AS(odd_parity_translation(exact_cfg(1, 3, Variant::Plus)), PreconditionError);
  CHECK_THROWS_AS(odd_parity_translation(exact_cfg(1, 2, Variant::Plus)), PreconditionError);
}

TEST_CASE("residues are +-i") {
  for (auto cfg : {exact_cfg(1, 2, Variant::Plus), exact_cfg(2, 3, Variant::Minus),
                   exact_cfg(1, 5, Variant::Minus)}) {
    const double t = 0.3;
    for (const auto& p : oracle_poles(cfg, t)) {
      const auto r = residue_at_pole(cfg, p.x, t);
      CHECK(std::abs(std::abs(r.value.imag()) - 1.0) < 1e-8);
      CHECK(std::abs(r.value.real()) < 1e-8);
      CHECK(std::abs(r.contour - r.value) < 1e-6);
      // conjugate pole, conjugate residue
      const auto rc = residue_at_pole(cfg, std::conj(p.x), t);
      CHECK(std::abs(rc.value - std::conj(r.value)) < 1e-8);
    }
  }
  // one-soliton: -k sech(-k x + k^3 t) at x = i pi/(2k)
  const double k = 1.5;
  const auto res = contour_residue(
      [k](Complex z) { return value_of(eval_one_soliton(k, 0.0, z, 0.0)); },
      Complex(0.0, kPi / (2 * k)), 1e-3);
  CHECK(std::abs(std::abs(res) - 1.0) < 1e-10);
  CHECK(std::abs(res.real()) < 1e-10);

  const auto exc = exact_cfg(1, 5, Variant::Minus);
  CHECK_THROWS_AS(residue_at_pole(exc, Complex(0.0, kPi / 2), 0.0), PreconditionError);
}

TEST_CASE("invariant report json") {
  const auto cfg = exact_cfg(1, 2, Variant::Plus);
  const auto r = sign_law_over_curves(cfg, track_all(cfg, 0.1, 0.3));
  const auto j = to_json(r);
  CHECK(j["name"] == "vertical_sign_law");
  CHECK(j["pass"] == true);
  CHECK(j["witness"].is_null());
}
