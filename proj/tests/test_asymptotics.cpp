#include <set>

#include "doctest.h"
#include "solpole/asymptotics.hpp"
#include "solpole/exppoly.hpp"
#include "test_support.hpp"

using namespace solpole;
using solpole::testing::exact_cfg;
using solpole::testing::rel_err;

namespace {

const FamilyLabel kSlowMinus1{SpeedClass::Slow, 1, TimeDirection::MinusInfinity};

// zero of the frame function near q by Newton with a central-difference derivative
Complex frame_zero(const MovingFrame& f, Complex q, double p) {
  for (int i = 0; i < 60; ++i) {
    const double h = 1e-6;
    const Complex d = (f.eval(q + h, p) - f.eval(q - h, p)) / (2 * h);
    const Complex step = f.eval(q, p) / d;
    q -= step;
    if (std::abs(step) < 1e-15) break;
  }
  return q;
}

}  // namespace

TEST_CASE("predicted positions") {
  const auto cfg = exact_cfg(1, 2, Variant::Plus);
  const double l3 = std::log(3.0);
  CHECK(std::abs(predicted_pole(cfg, kSlowMinus1, -10.0) - Complex(-10.0 + l3, kPi / 2)) < 1e-13);
  const FamilyLabel fast_plus{SpeedClass::Fast, 1, TimeDirection::PlusInfinity};
  CHECK(std::abs(predicted_pole(cfg, fast_plus, 10.0) - Complex(40.0 + l3 / 2, -kPi / 4)) <
        1e-13);
  // slow wave is shifted back by 2 log(gamma)/k1 through the interaction
  const FamilyLabel slow_plus{SpeedClass::Slow, 1, TimeDirection::PlusInfinity};
  const double before = predicted_pole(cfg, kSlowMinus1, -7.0).real() + 7.0;
  const double after = predicted_pole(cfg, slow_plus, 7.0).real() - 7.0;
  CHECK(before - after == doctest::Approx(2 * l3));

  CHECK_THROWS_AS(predicted_pole(cfg, kSlowMinus1, 1.0), PreconditionError);
  CHECK_THROWS_AS(predicted_pole(cfg, slow_plus, -1.0), PreconditionError);
  CHECK_THROWS_AS(predicted_pole(cfg, FamilyLabel{SpeedClass::Slow, 2}, -1.0), PreconditionError);

  // shifted configurations translate with the interaction point
  const auto shifted = SolitonConfig::exact(Rational(1), Rational(2), Variant::Plus, 0.7, -0.4);
  const auto ip = interaction_point(shifted);
  CHECK(std::abs(predicted_pole(shifted, kSlowMinus1, ip.t0 - 5.0) -
                 (ip.x0 + predicted_pole(cfg, kSlowMinus1, -5.0))) < 1e-12);
}

TEST_CASE("tangent slopes: printed values and the corrected phase") {
  const auto plus = exact_cfg(1, 2, Variant::Plus);
  const auto minus = exact_cfg(1, 2, Variant::Minus);
  CHECK(std::abs(tangent_slope_printed(plus, kSlowMinus1) - Complex(8.0 / 27.0)) < 1e-14);
  CHECK(std::abs(tangent_slope_printed(minus, kSlowMinus1) - Complex(-8.0 / 27.0)) < 1e-14);
  CHECK(std::abs(tangent_slope(plus, kSlowMinus1) - Complex(0.0, -8.0 / 27.0)) < 1e-14);
  for (int n : {-3, -1, 1, 3}) {
    const FamilyLabel fl{SpeedClass::Fast, n, TimeDirection::MinusInfinity};
    const double mod = 4.0 / 3.0 * std::pow(3.0, -0.5);
    CHECK(std::abs(tangent_slope_printed(plus, fl)) == doctest::Approx(mod));
    CHECK(std::abs(tangent_slope(plus, fl)) == doctest::Approx(mod));
    CHECK(std::abs(tangent_slope(plus, fl) - Complex(0.0, -1.0) * tangent_slope_printed(plus, fl)) <
          1e-14);
  }
}

TEST_CASE("tangent slopes agree with implicit differentiation of H and I") {
  for (auto cfg : {exact_cfg(1, 2, Variant::Plus), exact_cfg(1, 2, Variant::Minus),
                   exact_cfg(2, 5, Variant::Plus), exact_cfg(1, 3, Variant::Minus),
                   SolitonConfig::approximate(1.0, std::sqrt(2.0), Variant::Minus)}) {
    const double lg = std::log(cfg.gamma);
    const double p = 1e-7;
    for (int m : {-3, -1, 1, 3, 5}) {
      const MovingFrame slow{SpeedClass::Slow, cfg};
      const Complex z0(lg / cfg.k1, m * kPi / (2 * cfg.k1));
      const Complex measured = (frame_zero(slow, z0, p) - z0) / p;
      const FamilyLabel sl{SpeedClass::Slow, m, TimeDirection::MinusInfinity};
      CHECK(rel_err(measured, tangent_slope(cfg, sl)) < 1e-5);

      const MovingFrame fast{SpeedClass::Fast, cfg};
      const Complex w0(-lg / cfg.k2, m * kPi / (2 * cfg.k2));
      const Complex measured_w = (frame_zero(fast, w0, p) - w0) / p;
      const FamilyLabel fl{SpeedClass::Fast, m, TimeDirection::MinusInfinity};
      CHECK(rel_err(measured_w, tangent_slope(cfg, fl)) < 1e-5);
    }
  }
}

TEST_CASE("frame identity F = H(z, r) = s^-2 I(w, s)") {
  solpole::testing::PointSampler rng(11, 2.0, 2.0, 1.0);
  for (auto cfg : {exact_cfg(1, 2, Variant::Plus), exact_cfg(2, 3, Variant::Minus)}) {
    const MovingFrame slow{SpeedClass::Slow, cfg}, fast{SpeedClass::Fast, cfg};
    for (int i = 0; i < 50; ++i) {
      const Complex x = rng.x();
      const double t = rng.t();
      const Complex F = eval_FG(cfg, x, t).F;
      const Complex H = slow.eval(slow.coordinate(x, t), slow.parameter(t));
      const double s = fast.parameter(t);
      const Complex I = fast.eval(fast.coordinate(x, t), s) / (s * s);
      CHECK(rel_err(F, H) < 1e-10);
      CHECK(rel_err(F, I) < 1e-10);
    }
  }
  const MovingFrame f{SpeedClass::Slow, exact_cfg(1, 2, Variant::Plus)};
  CHECK(f.parameter(0.0) == 1.0);
  CHECK(f.parameter(-3.0) > 0.0);
}

TEST_CASE("H(., 0) vanishes exactly on the slow lattice") {
  for (auto cfg : {exact_cfg(1, 2, Variant::Plus), exact_cfg(2, 3, Variant::Minus)}) {
    // H(z, 0) = 1 + gamma^2 y^2 with y = exp(-k1 z)
    const double g = cfg.gamma;
    const auto roots = polynomial_roots({Complex(1.0), Complex(0.0), Complex(g * g)});
    std::vector<Complex> zs;
    for (const auto& r : roots.roots) {
      CHECK(r.multiplicity == 1);
      zs.push_back(-std::log(r.y) / cfg.k1);  // principal branch: Im in (-pi/k1, pi/k1]
    }
    std::vector<Complex> lattice;
    for (int m : {-1, 1}) lattice.push_back({std::log(g) / cfg.k1, m * kPi / (2 * cfg.k1)});
    REQUIRE(zs.size() == 2);
    for (const auto& z : lattice) {
      double best = HUGE_VAL;
      for (const auto& r : zs) best = std::min(best, std::abs(r - z));
      CHECK(best < 1e-12);
      CHECK(std::abs(MovingFrame{SpeedClass::Slow, cfg}.eval(z, 0.0)) < 1e-12);
    }
    // an even index is not a zero
    const Complex even(std::log(g) / cfg.k1, 2 * kPi / (2 * cfg.k1));
    CHECK(std::abs(MovingFrame{SpeedClass::Slow, cfg}.eval(even, 0.0)) > 1.0);
  }
}

TEST_CASE("polished poles are zeros of F and resolve the first-order term") {
  const auto cfg = exact_cfg(1, 2, Variant::Plus);
  for (const auto& seed : asymptotic_seeds(cfg, -6.0, -kPi, kPi)) {
    const auto p = polish_pole(cfg, seed.label, seed.x, -6.0);
    CHECK(std::abs(p.x - seed.x) < 1e-3);
    const TwoSoliton s(cfg);
    const double ls = s.log_scale(p.x, -6.0);
    CHECK(std::abs(s.F(p.x, -6.0, ls)) < 1e-12 * s.F_magnitude(p.x, -6.0, ls));
    CHECK(rel_err(p.offset / first_order_term(cfg, seed.label, -6.0), Complex(1.0)) < 1e-3);
  }
  // +inf side through the mirror
  for (const auto& seed : asymptotic_seeds(cfg, 6.0, -kPi, kPi)) {
    const auto p = polish_pole(cfg, seed.label, seed.x, 6.0);
    const TwoSoliton s(cfg);
    const double ls = s.log_scale(p.x, 6.0);
    CHECK(std::abs(s.F(p.x, 6.0, ls)) < 1e-12 * s.F_magnitude(p.x, 6.0, ls));
    CHECK(rel_err(p.offset / first_order_term(cfg, seed.label, 6.0), Complex(1.0)) < 1e-3);
  }
}

TEST_CASE("seeding time and seeds") {
  const auto cfg = exact_cfg(1, 2, Variant::Plus);
  const double ts = seed_time(cfg);
  const MovingFrame slow{SpeedClass::Slow, cfg}, fast{SpeedClass::Fast, cfg};
  CHECK(slow.parameter(ts) <= 1e-6 * (1 + 1e-12));
  CHECK(fast.parameter(ts) <= 1e-6 * (1 + 1e-12));
  CHECK_THROWS_AS(seed_time(cfg, 2.0), PreconditionError);

  const auto seeds = asymptotic_seeds(cfg, ts, -kPi, kPi);
  REQUIRE(seeds.size() == 6);  // 2 (p1 + p2)
  const auto poles = oracle_poles(cfg, ts);
  const auto fn = zero_function_F(cfg);
  std::set<std::size_t> hit;
  for (const auto& sd : seeds) {
    Complex x = sd.x;
    int it = 0;
    for (; it < 20; ++it) {
      const auto e = fn(x, ts);
      const Complex step = e.f / e.fx;
      x -= step;
      if (std::abs(step) < 1e-13) break;
    }
    CHECK(it < 5);
    for (std::size_t i = 0; i < poles.size(); ++i)
      if (std::abs(wrap_to_strip(poles[i].x - x, kPi)) < 1e-9) hit.insert(i);
  }
  CHECK(hit.size() == 6);
}

TEST_CASE("family matching for (1, 2) Plus") {
  const auto cfg = exact_cfg(1, 2, Variant::Plus);
  const auto curves = track_all(cfg, -20.0, 20.0);
  REQUIRE(curves.size() == 6);
  const auto rep = match_families(curves, cfg, 10.0);
  CHECK(rep.matches.size() == 12);
  CHECK(rep.unmatched.empty());
  CHECK(rep.max_residual < 1e-3);
  CHECK(rep.residuals_decrease);
  std::set<std::string> minus_labels, plus_labels;
  for (const auto& m : rep.matches) {
    REQUIRE(m.ladder.size() == 2);
    CHECK(m.tracked_gap < 1e-8);
    CHECK(std::abs(m.tangent_ratio - 1.0) < 0.05);
    // the printed phase is off by -i (t -> -inf) and, through the mirror, +i (t -> +inf)
    const Complex off = m.label.direction == TimeDirection::MinusInfinity ? Complex(0.0, -1.0)
                                                                          : Complex(0.0, 1.0);
    CHECK(std::abs(m.tangent_ratio_printed - off) < 0.05);
    (m.label.direction == TimeDirection::MinusInfinity ? minus_labels : plus_labels)
        .insert(to_string(m.label));
  }
  CHECK(minus_labels.size() == 6);
  CHECK(plus_labels.size() == 6);
  // the +inf label set is the mirror of the -inf set
  for (const auto& m : rep.matches)
    if (m.label.direction == TimeDirection::MinusInfinity)
      CHECK(plus_labels.count(to_string(mirror_label(m.label))) == 1);
  // both slow curves leave through fast families
  int switched = 0;
  for (const auto& a : rep.matches)
    for (const auto& b : rep.matches)
      if (a.curve == b.curve && a.label.direction == TimeDirection::MinusInfinity &&
          b.label.direction == TimeDirection::PlusInfinity && a.label.speed == SpeedClass::Slow)
        switched += b.label.speed == SpeedClass::Fast;
  CHECK(switched == 2);

  const auto j = to_json(rep);
  CHECK(j["matches"].size() == 12);
  CHECK(j["matches"][0]["ladder"].size() == 2);
}

TEST_CASE("matching edge cases") {
  const auto cfg = exact_cfg(1, 2, Variant::Plus);
  CHECK(match_families({}, cfg, 10.0).matches.empty());
  const auto curves = track_all(cfg, -10.0, -5.0);
  CHECK_THROWS_AS(match_families(curves, cfg, 0.0), PreconditionError);
  // curves not reaching the horizon are reported unmatched
  CHECK(match_families(curves, cfg, 12.0).unmatched.size() == 6);
  // the same curve twice is an ambiguous match
  CHECK_THROWS_AS(match_families({curves[0], curves[0]}, cfg, 6.0), Error);
}

TEST_CASE("incommensurable seeds track and match") {
  const auto cfg = SolitonConfig::approximate(1.0, std::sqrt(2.0), Variant::Plus);
  const double ts = seed_time(cfg);
  std::vector<PoleCurve> curves;
  for (const auto& sd : asymptotic_seeds(cfg, ts, -kPi / 2 - 0.1, kPi / 2 + 0.1))
    curves.push_back(track_curve(cfg, sd.x, ts, -ts));
  REQUIRE(curves.size() >= 3);
  const auto rep = match_families(curves, cfg, -ts);
  CHECK(rep.max_residual < 1e-3);
  for (const auto& m : rep.matches) CHECK(m.tracked_gap < 1e-8);
}
