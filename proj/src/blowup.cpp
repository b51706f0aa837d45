#include "solpole/blowup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "solpole/exppoly.hpp"
#include "solpole/report.hpp"

namespace solpole {

namespace {

// Newton on F at fixed t; the curve samples are close enough to start from.
Complex polish(const ZeroFunction& fn, Complex x, double t) {
  for (int i = 0; i < 60; ++i) {
    const ZeroEval ev = fn(x, t);
    const Complex dx = ev.f / ev.fx;
    x -= dx;
    if (std::abs(dx) <= 1e-15 * (1.0 + std::abs(x))) return x;
  }
  const ZeroEval ev = fn(x, t);
  if (!(std::abs(ev.f) <= 1e-10 * ev.magnitude))
    throw ConvergenceError("pole polish did not converge at t=" + std::to_string(t));
  return x;
}

double vertical_speed(const ZeroFunction& fn, Complex x, double t) {
  const ZeroEval ev = fn(x, t);
  return std::imag(-ev.ft / ev.fx);
}

double tangential_tol(const SolitonConfig& cfg) { return 1e-8 * std::max(1.0, cfg.k2 * cfg.k2); }

struct Candidate {
  Crossing c;
  std::size_t idx = 0;
  int copy = 0;
};

}  // namespace

std::vector<Crossing> all_crossings(const SolitonConfig& cfg, const PoleCurve& curve, double alpha) {
  const auto& sm = curve.samples;
  const std::size_t n = sm.size();
  std::vector<Crossing> out;
  if (n < 2) return out;
  const ZeroFunction fn = zero_function_F(cfg);
  const double on_line = 1e-9 * cfg.strip_scale();
  const double vtol = tangential_tol(cfg);
  auto h = [&](std::size_t i) { return sm[i].x.imag() + alpha; };

  auto refine = [&](double ta, double tb) {
    auto H = [&](double t) { return polish(fn, curve.at(t), t).imag() + alpha; };
    double fa = H(ta), fb = H(tb);
    Crossing c;
    if (fa == 0.0 || fb == 0.0) {
      c.t_star = fa == 0.0 ? ta : tb;
    } else {
      std::uintmax_t iters = 200;
      auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-12; };
      const auto br = boost::math::tools::toms748_solve(H, ta, tb, fa, fb, tol, iters);
      c.t_star = 0.5 * (br.first + br.second);
    }
    c.x_star = polish(fn, curve.at(c.t_star), c.t_star);
    c.vertical_speed = vertical_speed(fn, c.x_star, c.t_star);
    c.tangential = std::abs(c.vertical_speed) < vtol;
    return c;
  };

  std::size_t i = 0;
  while (i < n) {
    if (std::abs(h(i)) <= on_line) {
      std::size_t j = i;
      while (j + 1 < n && std::abs(h(j + 1)) <= on_line) ++j;
      const bool bracket = i > 0 && j + 1 < n && h(i - 1) * h(j + 1) < 0.0;
      if (j == i && bracket) {
        out.push_back(refine(sm[i - 1].t, sm[i + 1].t));
      } else {
        // a stretch on the line, or a touch without a sign change
        Crossing c;
        c.t_star = sm[i].t;
        c.x_star = polish(fn, sm[i].x, sm[i].t);
        c.vertical_speed = vertical_speed(fn, c.x_star, c.t_star);
        c.tangential = j > i || !bracket || std::abs(c.vertical_speed) < vtol;
        out.push_back(c);
      }
      i = j + 1;
      continue;
    }
    if (i + 1 < n && std::abs(h(i + 1)) > on_line && h(i) * h(i + 1) < 0.0)
      out.push_back(refine(sm[i].t, sm[i + 1].t));
    ++i;
  }
  return out;
}

Crossing find_crossing(const SolitonConfig& cfg, const PoleCurve& curve, double alpha) {
  auto all = all_crossings(cfg, curve, alpha);
  if (all.empty())
    throw PreconditionError("curve does not cross Im x = " + report::format_double(-alpha) +
                            " over its span");
  return all.front();
}

AlphaChoice select_alpha(const SolitonConfig& cfg, const std::vector<PoleCurve>& curves,
                         double min_separation) {
  if (curves.empty()) throw PreconditionError("select_alpha needs tracked curves");
  const double s = cfg.strip_scale();
  const bool periodic = cfg.comm.has_value();

  std::vector<double> ords;
  for (const auto& c : curves)
    if (!c.samples.empty()) ords.push_back(c.front().x.imag());
  std::sort(ords.begin(), ords.end());
  std::vector<double> uniq;
  for (double o : ords)
    if (uniq.empty() || o - uniq.back() > 1e-6 * s) uniq.push_back(o);
  std::vector<double> mids;
  for (std::size_t i = 0; i + 1 < uniq.size(); ++i) mids.push_back(0.5 * (uniq[i] + uniq[i + 1]));
  if (periodic && !uniq.empty()) {
    double m = 0.5 * (uniq.back() + uniq.front() + 2.0 * s);
    if (m > s) m -= 2.0 * s;
    mids.push_back(m);
  }

  const int qmax = periodic ? 1 : 0;
  bool found = false;
  double best_score = -1.0;
  AlphaChoice best;
  for (double mid : mids) {
    const double alpha = -mid;
    std::vector<Candidate> cands;
    for (std::size_t k = 0; k < curves.size(); ++k)
      for (int q = -qmax; q <= qmax; ++q)
        for (Crossing c : all_crossings(cfg, curves[k], alpha + 2.0 * q * s)) {
          c.x_star += Complex(0.0, 2.0 * q * s);
          cands.push_back({c, k, q});
        }
    if (cands.empty()) continue;
    std::sort(cands.begin(), cands.end(),
              [](const Candidate& a, const Candidate& b) { return a.c.t_star < b.c.t_star; });
    bool ok = true;
    double score = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cands.size(); ++i) {
      if (cands[i].c.tangential) ok = false;
      if (i > 0 && cands[i].c.t_star - cands[i - 1].c.t_star < min_separation) ok = false;
      score = std::min(score, std::abs(cands[i].c.vertical_speed));
    }
    if (!ok || score <= best_score) continue;
    found = true;
    best_score = score;
    best = AlphaChoice{};
    best.alpha = alpha;
    best.curve_index = cands.front().idx;
    best.copy = cands.front().copy;
    best.crossing = cands.front().c;
    for (const auto& c : cands) best.crossings.push_back(c.c);
  }
  if (!found) throw Error("no line Im x = -alpha with clean, separated crossings was found");
  return best;
}

ProfileGrid default_grid(const SolitonConfig& cfg, const Crossing& crossing) {
  const double t = crossing.t_star;
  const double c = crossing.x_star.real();
  const double p1 = cfg.x1 + cfg.k1 * cfg.k1 * t;
  const double p2 = cfg.x2 + cfg.k2 * cfg.k2 * t;
  ProfileGrid g;
  const double reach = 30.0 / cfg.k1;
  g.x_lo = std::min({c, p1, p2}) - reach;
  g.x_hi = std::max({c, p1, p2}) + reach;
  g.spacing = cfg.strip_scale() / 64.0;
  return g;
}

namespace {

double tail_slope(const std::vector<double>& xs, const std::vector<double>& vals, std::size_t lo,
                  std::size_t hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double m = 0;
  for (std::size_t i = lo; i < hi; ++i) {
    if (!(vals[i] > 0.0)) continue;
    const double y = std::log(vals[i]);
    sx += xs[i];
    sy += y;
    sxx += xs[i] * xs[i];
    sxy += xs[i] * y;
    m += 1;
  }
  if (m < 3) return std::numeric_limits<double>::quiet_NaN();
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace

BlowupSample profile_at(const SolitonConfig& cfg, double alpha, const ProfileGrid& grid, double t) {
  if (!(grid.x_hi > grid.x_lo) || !(grid.spacing > 0.0))
    throw PreconditionError("profile grid must have x_lo < x_hi and positive spacing");
  const TwoSoliton ts(cfg);
  auto absu = [&](double x) {
    const PointValue v = ts.u(Complex(x, -alpha), t);
    if (is_pole(v))
      throw PreconditionError("pole on the line Im x = " + report::format_double(-alpha) +
                              " at t=" + report::format_double(t));
    return std::abs(std::get<Complex>(v));
  };

  const auto n = static_cast<std::size_t>(std::floor((grid.x_hi - grid.x_lo) / grid.spacing)) + 1;
  std::vector<double> xs(n), vals(n);
  std::size_t arg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = grid.x_lo + static_cast<double>(i) * grid.spacing;
    vals[i] = absu(xs[i]);
    if (vals[i] > vals[arg]) arg = i;
  }
  double peak = vals[arg];
  double center = xs[arg];
  if (std::max(vals.front(), vals.back()) > 1e-8 * peak)
    throw PreconditionError("profile grid too narrow: boundary |u| exceeds 1e-8 of the peak; widen it");

  double h = grid.spacing;
  for (int level = 0; level < grid.refine_levels; ++level) {
    const double lo = center - 2.0 * h;
    h /= 16.0;
    for (int k = 0; k <= 64; ++k) {
      const double x = lo + k * h;
      const double v = absu(x);
      if (v > peak) {
        peak = v;
        center = x;
      }
    }
  }
  const auto br = boost::math::tools::brent_find_minima([&](double x) { return -absu(x); },
                                                        center - h, center + h, 40);
  if (-br.second > peak) {
    peak = -br.second;
    center = br.first;
  }

  BlowupSample out;
  out.t = t;
  out.sup_abs_u = peak;
  out.argmax_x = center;
  const std::size_t quarter = n / 4;
  const double right = -tail_slope(xs, vals, n - quarter, n);
  const double left = tail_slope(xs, vals, 0, quarter);
  out.tail_rate = 0.5 * (left + right);
  return out;
}

std::vector<BlowupSample> blowup_profile(const BlowupScenario& scenario,
                                         const std::vector<double>& times) {
  std::vector<BlowupSample> out;
  out.reserve(times.size());
  for (double t : times) {
    if (std::abs(t - scenario.crossing.t_star) <= 1e-12)
      throw PreconditionError("profile times must exclude t_star");
    out.push_back(profile_at(scenario.cfg, scenario.alpha, scenario.grid, t));
  }
  return out;
}

std::vector<double> approach_ladder(double t_star, double first_decade, int decades,
                                    int per_decade, int side) {
  if (per_decade < 1 || decades < 0) throw PreconditionError("ladder needs per_decade >= 1");
  std::vector<double> out;
  for (int k = 0; k <= decades * per_decade; ++k)
    out.push_back(t_star + (side < 0 ? -1.0 : 1.0) *
                               std::pow(10.0, -(first_decade + double(k) / per_decade)));
  return out;
}

BlowupFit fit_blowup_rate(const std::vector<BlowupSample>& series, double t_star) {
  if (series.size() < 4) throw PreconditionError("blowup fit needs at least 4 ladder points");
  std::vector<double> X, Y;
  for (const auto& s : series) {
    const double d = std::abs(s.t - t_star);
    if (!(d > 0.0) || !(s.sup_abs_u > 0.0))
      throw PreconditionError("ladder point at t_star or with zero sup");
    X.push_back(std::log(d));
    Y.push_back(std::log(s.sup_abs_u));
  }
  const auto [lo, hi] = std::minmax_element(X.begin(), X.end());
  BlowupFit f;
  f.points = X.size();
  f.decades = (*hi - *lo) / std::log(10.0);
  if (f.decades < 2.0 - 1e-9) throw PreconditionError("blowup fit needs a ladder spanning 2 decades");
  const double m = static_cast<double>(X.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    sx += X[i];
    sy += Y[i];
    sxx += X[i] * X[i];
    sxy += X[i] * Y[i];
  }
  f.exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  const double icpt = (sy - f.exponent * sx) / m;
  f.amplitude = std::exp(icpt);
  double ss_res = 0, ss_tot = 0;
  const double ybar = sy / m;
  for (std::size_t i = 0; i < X.size(); ++i) {
    const double r = Y[i] - (icpt + f.exponent * X[i]);
    ss_res += r * r;
    ss_tot += (Y[i] - ybar) * (Y[i] - ybar);
  }
  f.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
  if (f.r_squared < 0.99)
    throw Error("poor blowup fit: R^2 = " + report::format_double(f.r_squared));
  return f;
}

double line_clearance(const SolitonConfig& cfg, double alpha, double t) {
  if (!cfg.comm) throw PreconditionError("line_clearance needs commensurable exact wavenumbers");
  const double s = cfg.strip_scale();
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : oracle_poles(cfg, t))
    for (int q = -1; q <= 1; ++q) best = std::min(best, std::abs(p.x.imag() + 2.0 * q * s + alpha));
  return best;
}

CoupledResidual coupled_system_residual(const SolitonConfig& cfg, double alpha, double x, double t,
                                        double h) {
  if (!(h > 0.0)) throw PreconditionError("step h must be positive");
  const TwoSoliton ts(cfg);
  const Complex z(x, -alpha);
  const double ls = ts.log_scale(z, t);
  const Complex F = ts.F(z, t, ls), Fx = ts.F(z, t, ls, 1, 0);
  if (std::abs(F) < 5.0 * h * std::abs(Fx))
    throw PreconditionError("stencil polluted by a nearby pole (distance ~ " +
                            report::format_double(std::abs(F / Fx)) + ")");
  auto U = [&](double dx, double dt) {
    const PointValue v = ts.u(z + dx, t + dt);
    if (is_pole(v)) throw PreconditionError("stencil hits a pole");
    return std::get<Complex>(v);
  };
  const Complex u0 = U(0, 0);
  const Complex p1 = U(h, 0), m1 = U(-h, 0), p2 = U(2 * h, 0), m2 = U(-2 * h, 0);
  const Complex ut = (U(0, h) - U(0, -h)) / (2 * h);
  const Complex ux = (p1 - m1) / (2 * h);
  const Complex uxxx = (p2 - 2.0 * p1 + 2.0 * m1 - m2) / (2 * h * h * h);

  const double r = u0.real(), s = u0.imag();
  const double rx = ux.real(), sx = ux.imag();
  const double base_r = ut.real() + uxxx.real() + 6 * (r * r - s * s) * rx;
  const double base_s = ut.imag() + uxxx.imag() + 6 * (r * r - s * s) * sx;
  CoupledResidual out;
  out.res_r = base_r - 12 * r * s * sx;
  out.res_s = base_s + 12 * r * s * rx;
  out.printed_r = base_r - 2 * r * s * sx;
  out.printed_s = base_s + 2 * r * s * rx;
  const Complex nonlin = 6.0 * u0 * u0 * ux;
  out.complex_residual = ut + uxxx + nonlin;
  out.scale = std::max({std::abs(ut), std::abs(uxxx), std::abs(nonlin)});
  return out;
}

nlohmann::ordered_json to_json(const BlowupScenario& s) {
  nlohmann::ordered_json j;
  j["config"] = report::config_json(s.cfg);
  j["alpha"] = s.alpha;
  j["t_star"] = s.crossing.t_star;
  j["x_star"] = report::complex_json(s.crossing.x_star);
  j["vertical_speed"] = s.crossing.vertical_speed;
  j["tangential"] = s.crossing.tangential;
  j["grid"] = {{"x_lo", s.grid.x_lo},
               {"x_hi", s.grid.x_hi},
               {"spacing", s.grid.spacing},
               {"refine_levels", s.grid.refine_levels}};
  nlohmann::ordered_json series = nlohmann::ordered_json::array();
  for (const auto& p : s.series)
    series.push_back({{"t", p.t},
                      {"sup_abs_u", p.sup_abs_u},
                      {"argmax_x", p.argmax_x},
                      {"tail_rate", p.tail_rate}});
  j["series"] = series;
  return j;
}

nlohmann::ordered_json to_json(const BlowupFit& f) {
  nlohmann::ordered_json j;
  j["exponent"] = f.exponent;
  j["amplitude"] = f.amplitude;
  j["r_squared"] = f.r_squared;
  j["decades"] = f.decades;
  j["points"] = f.points;
  return j;
}

std::string series_to_csv(const std::vector<BlowupSample>& series) {
  report::CsvTable tab({"t", "sup_abs_u", "argmax_x", "tail_rate"});
  for (const auto& p : series) tab.add_numeric_row({p.t, p.sup_abs_u, p.argmax_x, p.tail_rate});
  return tab.str();
}

namespace {

BlowupScenario assemble(const SolitonConfig& cfg, const std::vector<PoleCurve>& curves,
                        const AlphaChoice& choice) {
  BlowupScenario sc;
  sc.cfg = cfg;
  sc.alpha = choice.alpha;
  sc.crossing = choice.crossing;
  sc.crossing_pole = curves[choice.curve_index];
  const Complex shift(0.0, 2.0 * choice.copy * cfg.strip_scale());
  for (auto& smp : sc.crossing_pole.samples) smp.x += shift;
  if (sc.crossing_pole.collision_point) *sc.crossing_pole.collision_point += shift;
  sc.grid = default_grid(cfg, sc.crossing);
  return sc;
}

}  // namespace

BlowupScenario build_scenario(const SolitonConfig& cfg, double t_start, double t_end,
                              const TrackOptions& opts) {
  const auto curves = track_all(cfg, t_start, t_end, opts);
  return assemble(cfg, curves, select_alpha(cfg, curves));
}

BlowupScenario build_scenario_at(const SolitonConfig& cfg, double alpha, double t_start,
                                 double t_end, const TrackOptions& opts) {
  const auto curves = track_all(cfg, t_start, t_end, opts);
  const double s = cfg.strip_scale();
  std::optional<Candidate> first;
  AlphaChoice choice;
  choice.alpha = alpha;
  for (std::size_t k = 0; k < curves.size(); ++k)
    for (int q = -1; q <= 1; ++q)
      for (Crossing c : all_crossings(cfg, curves[k], alpha + 2.0 * q * s)) {
        c.x_star += Complex(0.0, 2.0 * q * s);
        choice.crossings.push_back(c);
        if (!c.tangential && (!first || c.t_star < first->c.t_star)) first = Candidate{c, k, q};
      }
  if (!first)
    throw PreconditionError("no transversal crossing of Im x = " + report::format_double(-alpha) +
                            " in [" + report::format_double(t_start) + ", " +
                            report::format_double(t_end) + "]");
  std::sort(choice.crossings.begin(), choice.crossings.end(),
            [](const Crossing& a, const Crossing& b) { return a.t_star < b.t_star; });
  choice.curve_index = first->idx;
  choice.copy = first->copy;
  choice.crossing = first->c;
  return assemble(cfg, curves, choice);
}

}  // namespace solpole
