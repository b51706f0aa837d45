#include "doctest.h"
#include "solpole/blowup.hpp"
#include "solpole/exppoly.hpp"
#include "test_support.hpp"

using namespace solpole;
using solpole::testing::exact_cfg;

namespace {

// the oracle pole nearest to guess, lattice copies included
Complex oracle_near(const SolitonConfig& cfg, Complex guess, double t) {
  const double s = cfg.strip_scale();
  Complex best;
  double d = HUGE_VAL;
  for (const auto& p : oracle_poles(cfg, t))
    for (int q = -1; q <= 1; ++q) {
      const Complex c = p.x + Complex(0, 2.0 * q * s);
      if (std::abs(c - guess) < d) {
        d = std::abs(c - guess);
        best = c;
      }
    }
  return best;
}

const BlowupScenario& scenario_12() {
  static const BlowupScenario sc = build_scenario(exact_cfg(1, 2, Variant::Plus));
  return sc;
}

}  // namespace

TEST_CASE("crossing time agrees with bisection on oracle roots") {
  const auto& sc = scenario_12();
  const auto& cfg = sc.cfg;
  CHECK_FALSE(sc.crossing.tangential);
  CHECK(std::abs(sc.crossing.x_star.imag() + sc.alpha) < 1e-10);

  // plain bisection, the root finder standing in for the tracker
  auto h = [&](double t) { return oracle_near(cfg, sc.crossing_pole.at(t), t).imag() + sc.alpha; };
  double a = sc.crossing.t_star - 0.05, b = sc.crossing.t_star + 0.05;
  REQUIRE(h(a) * h(b) < 0.0);
  for (int i = 0; i < 45; ++i) {
    const double m = 0.5 * (a + b);
    (h(a) * h(m) <= 0.0 ? b : a) = m;
  }
  CHECK(std::abs(0.5 * (a + b) - sc.crossing.t_star) < 1e-9);

  // vertical speed against a centered difference of oracle poles
  const double e = 1e-6, ts = sc.crossing.t_star;
  const double v = (oracle_near(cfg, sc.crossing.x_star, ts + e).imag() -
                    oracle_near(cfg, sc.crossing.x_star, ts - e).imag()) /
                   (2 * e);
  CHECK(std::abs(v - sc.crossing.vertical_speed) < 1e-6);

  // the only crossing on this curve
  CHECK(all_crossings(cfg, sc.crossing_pole, sc.alpha).size() == 1);
}

TEST_CASE("alpha selection sits between ordinates and keeps crossings transversal") {
  const auto cfg = exact_cfg(1, 2, Variant::Plus);
  const auto curves = track_all(cfg, -3.0, 3.0);
  const auto ch = select_alpha(cfg, curves);
  REQUIRE(!ch.crossings.empty());
  for (const auto& c : ch.crossings) CHECK_FALSE(c.tangential);
  for (std::size_t i = 1; i < ch.crossings.size(); ++i)
    CHECK(ch.crossings[i].t_star - ch.crossings[i - 1].t_star >= 0.1);
  // no pole sits on the line at the seed time
  for (const auto& c : curves) CHECK(std::abs(c.front().x.imag() + ch.alpha) > 0.1);
  CHECK(ch.crossing.t_star == ch.crossings.front().t_star);

  // a strict separation demand leaves nothing
  CHECK_THROWS_AS(select_alpha(cfg, curves, 10.0), Error);
  CHECK_THROWS_AS(select_alpha(cfg, {}), PreconditionError);
}

TEST_CASE("no crossing and tangential crossing") {
  const auto& sc = scenario_12();
  // far outside the curve's range of Im x
  CHECK_THROWS_AS(find_crossing(sc.cfg, sc.crossing_pole, 10.0), PreconditionError);

  // odd parity, non-exceptional: poles moving along Im x = lambda pi / 2
  const auto cfg = exact_cfg(1, 3, Variant::Minus);
  const auto curves = track_all(cfg, -1.0, 1.0);
  int horizontal = 0;
  for (const auto& c : curves) {
    double lo = HUGE_VAL, hi = -HUGE_VAL;
    for (const auto& s : c.samples) {
      lo = std::min(lo, s.x.imag());
      hi = std::max(hi, s.x.imag());
    }
    if (hi - lo > 1e-10) continue;
    ++horizontal;
    CHECK(std::abs(std::abs(lo) - kPi / 2) < 1e-10);
    const Crossing c0 = find_crossing(cfg, c, -lo);
    CHECK(c0.tangential);
    CHECK(std::abs(c0.vertical_speed) < 1e-8);
  }
  CHECK(horizontal == 4);
}

TEST_CASE("profile near the crossing") {
  const auto& sc = scenario_12();
  const double ts = sc.crossing.t_star;
  const TwoSoliton u(sc.cfg);

  SUBCASE("finite peak near Re x_star, matching a dense direct scan") {
    const double t = ts - 1e-2;
    const auto p = profile_at(sc.cfg, sc.alpha, sc.grid, t);
    CHECK(std::isfinite(p.sup_abs_u));
    CHECK(std::abs(p.argmax_x - sc.crossing.x_star.real()) < 0.1);
    double brute = 0.0;
    for (int i = -20000; i <= 20000; ++i) {
      const double x = p.argmax_x + i * 1e-6;
      brute = std::max(brute, std::abs(value_of(u.u(Complex(x, -sc.alpha), t))));
    }
    CHECK(p.sup_abs_u >= brute * (1 - 1e-9));
    CHECK(p.sup_abs_u <= brute * (1 + 1e-6));
  }

  SUBCASE("sup grows monotonically along the ladder") {
    const auto series = blowup_profile(sc, approach_ladder(ts, 1.0, 4, 1));
    REQUIRE(series.size() == 5);
    for (std::size_t i = 1; i < series.size(); ++i)
      CHECK(series[i].sup_abs_u > series[i - 1].sup_abs_u);
  }

  SUBCASE("far from the crossing the profile is a bounded two-soliton shape") {
    const auto p = profile_at(sc.cfg, sc.alpha, sc.grid, ts - 1.0);
    CHECK(p.sup_abs_u < 10.0);
    CHECK(std::abs(p.tail_rate - sc.cfg.k1) < 0.1 * sc.cfg.k1);
  }

  SUBCASE("t_star itself and a narrow grid are refused") {
    CHECK_THROWS_AS(blowup_profile(sc, {ts}), PreconditionError);
    ProfileGrid narrow = sc.grid;
    narrow.x_lo = sc.crossing.x_star.real() - 1.0;
    narrow.x_hi = sc.crossing.x_star.real() + 1.0;
    CHECK_THROWS_AS(profile_at(sc.cfg, sc.alpha, narrow, ts - 1e-2), PreconditionError);
  }
}

TEST_CASE("blowup rate against the simple-pole model") {
  const auto& sc = scenario_12();
  const double ts = sc.crossing.t_star;
  const auto series = blowup_profile(sc, approach_ladder(ts));
  REQUIRE(series.size() == 7);
  const auto fit = fit_blowup_rate(series, ts);
  CHECK(fit.decades == doctest::Approx(3.0));
  CHECK(std::abs(fit.exponent + 1.0) < 0.05);
  CHECK(fit.r_squared > 0.99);

  // residue of unit size, distance to the line |v| |t - t_star|
  const double e = 1e-6;
  const double v = (oracle_near(sc.cfg, sc.crossing.x_star, ts + e).imag() -
                    oracle_near(sc.cfg, sc.crossing.x_star, ts - e).imag()) /
                   (2 * e);
  CHECK(std::abs(fit.amplitude * std::abs(v) - 1.0) < 0.1);

  // Laurent model at the innermost point: u ~ r/(z - x_p(t)), |r| = 1
  const auto& last = series.back();
  const Complex xp = oracle_near(sc.cfg, sc.crossing.x_star, last.t);
  CHECK(std::abs(last.sup_abs_u * std::abs(xp.imag() + sc.alpha) - 1.0) < 1e-3);

  for (const auto& p : series) CHECK(std::abs(p.tail_rate - sc.cfg.k1) < 0.1 * sc.cfg.k1);
}

TEST_CASE("fit preconditions") {
  std::vector<BlowupSample> two{{-0.1, 10, 0, 1}, {-0.01, 100, 0, 1}};
  CHECK_THROWS_AS(fit_blowup_rate(two, 0.0), PreconditionError);
  std::vector<BlowupSample> narrow;
  for (int k = 0; k < 5; ++k) {
    const double d = std::pow(10.0, -1.0 - 0.2 * k);
    narrow.push_back({-d, 1 / d, 0, 1});
  }
  CHECK_THROWS_AS(fit_blowup_rate(narrow, 0.0), PreconditionError);
  std::vector<BlowupSample> noisy;
  for (int k = 0; k < 6; ++k) {
    const double d = std::pow(10.0, -1.0 - 0.5 * k);
    noisy.push_back({-d, (k % 2) ? 1.0 : 50.0, 0, 1});
  }
  CHECK_THROWS_AS(fit_blowup_rate(noisy, 0.0), Error);
  std::vector<BlowupSample> exact;
  for (int k = 0; k < 6; ++k) {
    const double d = std::pow(10.0, -1.0 - 0.5 * k);
    exact.push_back({2.0 + d, 3.0 / d, 0, 1});
  }
  const auto f = fit_blowup_rate(exact, 2.0);
  CHECK(f.exponent == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(f.amplitude == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("the line is pole-free in a punctured neighbourhood of t_star") {
  const auto& sc = scenario_12();
  const double ts = sc.crossing.t_star;
  CHECK(line_clearance(sc.cfg, sc.alpha, ts) < 1e-9);
  for (double d : {1e-1, 1e-2, 1e-3, 1e-4}) {
    for (double side : {-1.0, 1.0}) {
      const double c = line_clearance(sc.cfg, sc.alpha, ts + side * d);
      CHECK(c > 0.0);
      CHECK(c == doctest::Approx(std::abs(sc.crossing.vertical_speed) * d).epsilon(0.2));
    }
  }
}

TEST_CASE("sup norm scales with the wavenumbers") {
  // k -> s k maps u to s u(s x, s^3 t); far from t_star the sup scales by s
  const auto& sc = scenario_12();
  const double t = sc.crossing.t_star - 1.0;
  const double base = profile_at(sc.cfg, sc.alpha, sc.grid, t).sup_abs_u;
  for (auto [num, den] : {std::pair{1, 2}, std::pair{1, 4}}) {
    const double s = double(num) / den;
    const auto cs = SolitonConfig::exact(Rational(num, den), Rational(2 * num, den), Variant::Plus);
    Crossing cr = sc.crossing;
    cr.t_star /= s * s * s;
    cr.x_star /= s;
    const auto p = profile_at(cs, sc.alpha / s, default_grid(cs, cr), t / (s * s * s));
    CHECK(p.sup_abs_u / base == doctest::Approx(s).epsilon(1e-6));
  }
}

TEST_CASE("coupled real system on the shifted line") {
  const auto& sc = scenario_12();
  const double t = sc.crossing.t_star - 0.5;
  const double x = 0.3;

  const auto r1 = coupled_system_residual(sc.cfg, sc.alpha, x, t, 2e-2);
  const auto r2 = coupled_system_residual(sc.cfg, sc.alpha, x, t, 1e-2);
  const auto r3 = coupled_system_residual(sc.cfg, sc.alpha, x, t, 5e-3);
  auto mag = [](const CoupledResidual& r) { return std::hypot(r.res_r, r.res_s); };
  CHECK(mag(r1) / mag(r2) == doctest::Approx(4.0).epsilon(0.05));
  CHECK(mag(r2) / mag(r3) == doctest::Approx(4.0).epsilon(0.05));

  // the split is linear: real and imaginary parts of the complex residual
  for (const auto& r : {r1, r2, r3}) {
    CHECK(std::abs(r.res_r - r.complex_residual.real()) < 1e-10 * r.scale);
    CHECK(std::abs(r.res_s - r.complex_residual.imag()) < 1e-10 * r.scale);
  }

  // the as-printed coupling 2 r s leaves an O(1) residual
  CHECK(std::hypot(r3.printed_r, r3.printed_s) > 100.0 * mag(r3));

  // next to the crossing pole the stencil is refused
  CHECK_THROWS_AS(coupled_system_residual(sc.cfg, sc.alpha, sc.crossing.x_star.real(),
                                          sc.crossing.t_star + 1e-6, 1e-3),
                  PreconditionError);
}

TEST_CASE("scenario export") {
  BlowupScenario sc = scenario_12();
  sc.series = blowup_profile(sc, approach_ladder(sc.crossing.t_star, 2.0, 1, 1));
  const auto j = to_json(sc);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"config", "alpha", "t_star", "x_star", "vertical_speed",
                                         "tangential", "grid", "series"});
  CHECK(j["series"].size() == 2);
  const std::string csv = series_to_csv(sc.series);
  CHECK(csv.rfind("t,sup_abs_u,argmax_x,tail_rate\r\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}
