#include "solpole/interaction.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <boost/math/tools/toms748_solve.hpp>

#include "solpole/kernel.hpp"
#include "solpole/report.hpp"

namespace solpole {

namespace {

void require_centered(const SolitonConfig& cfg) {
  if (!cfg.has_zero_shifts())
    throw PreconditionError("interaction diagnostics need zero shifts (interaction at the origin)");
}

double sgn(Variant v) { return v == Variant::Plus ? -1.0 : 1.0; }

double real_u(const TwoSoliton& ts, double x, double t) {
  return value_of(ts.u(Complex(x, 0.0), t)).real();
}

DerivativeEstimate richardson(const std::function<double(double)>& d, double h) {
  DerivativeEstimate e;
  e.coarse = d(h);
  e.fine = d(0.5 * h);
  e.extrapolated = (4.0 * e.fine - e.coarse) / 3.0;
  return e;
}

}  // namespace

double uxx_at_center(double k1, double k2, Variant v) {
  const double s = sgn(v);
  return -(k2 + s * k1) * (k1 * k1 + 3.0 * s * k1 * k2 + k2 * k2);
}

double uxx_at_center(const SolitonConfig& cfg) {
  require_centered(cfg);
  return uxx_at_center(cfg.k1, cfg.k2, cfg.variant);
}

double extremum_speed(double k1, double k2, Variant v) {
  const double s = sgn(v);
  const double num = std::pow(k1, 4) + 3 * s * std::pow(k1, 3) * k2 + 3 * k1 * k1 * k2 * k2 +
                     3 * s * k1 * std::pow(k2, 3) + std::pow(k2, 4);
  const double den = k1 * k1 + 3 * s * k1 * k2 + k2 * k2;
  if (std::abs(den) <= 1e-12 * (k1 * k1 + k2 * k2))
    throw PreconditionError("singular configuration: k1^2 - 3 k1 k2 + k2^2 = 0");
  return num / den;
}

double extremum_speed(const SolitonConfig& cfg) {
  require_centered(cfg);
  return extremum_speed(cfg.k1, cfg.k2, cfg.variant);
}

DerivativeEstimate measure_uxx(const SolitonConfig& cfg, double h) {
  require_centered(cfg);
  const TwoSoliton ts(cfg);
  const double u0 = real_u(ts, 0, 0);
  const double k = cfg.k2;
  return richardson(
      [&](double s) {
        const double hx = s / k;
        return (real_u(ts, hx, 0) - 2 * u0 + real_u(ts, -hx, 0)) / (hx * hx);
      },
      h);
}

DerivativeEstimate measure_uxt(const SolitonConfig& cfg, double h) {
  require_centered(cfg);
  const TwoSoliton ts(cfg);
  const double k = cfg.k2;
  return richardson(
      [&](double s) {
        const double hx = s / k, ht = s / (k * k * k);
        return (real_u(ts, hx, ht) - real_u(ts, hx, -ht) - real_u(ts, -hx, ht) +
                real_u(ts, -hx, -ht)) /
               (4 * hx * ht);
      },
      h);
}

SpeedMeasurement measure_extremum_speed(const SolitonConfig& cfg, double h) {
  if (!(h > 0.0)) throw PreconditionError("step h must be positive");
  const auto xx = measure_uxx(cfg, h);
  const auto xt = measure_uxt(cfg, h);
  const double tiny = 1e-9 * std::pow(cfg.k2, 3);
  if (std::abs(xx.extrapolated) <= tiny || std::abs(xx.coarse) <= tiny || std::abs(xx.fine) <= tiny)
    throw PreconditionError("u_xx(0,0) vanishes; the extremum speed is undefined");
  SpeedMeasurement m;
  m.uxx = xx.extrapolated;
  m.uxt = xt.extrapolated;
  m.speed = -xt.extrapolated / xx.extrapolated;
  m.speed_coarse = -xt.coarse / xx.coarse;
  m.speed_fine = -xt.fine / xx.fine;
  return m;
}

namespace {

struct MaxFinder {
  const TwoSoliton& ts;
  double floor_u;  // ignore extrema of negligible size (far tails)
  int max_depth = 3;
  std::vector<double> found{};

  double ux(double x) const { return ts.u_jet(Complex(x, 0.0), 0.0).ux.real(); }

  // Newton on u_x inside [a, b]; nullopt if it leaves the cell
  std::optional<double> newton(double a, double b) const {
    double x = 0.5 * (a + b);
    for (int i = 0; i < 60; ++i) {
      const UJet j = ts.u_jet(Complex(x, 0.0), 0.0);
      const double d = j.ux.real() / j.uxx.real();
      if (!std::isfinite(d)) return std::nullopt;
      x -= d;
      if (x < a || x > b) return std::nullopt;
      if (std::abs(d) <= 1e-14 * (1.0 + std::abs(x))) return x;
    }
    return std::nullopt;
  }

  // a maximum in [a, b] from the analytic u_x, or nothing
  void settle(double a, double b) {
    std::optional<double> x;
    const double fa = ux(a), fb = ux(b);
    if (fa > 0.0 && fb < 0.0) {
      std::uintmax_t it = 200;
      const auto r = boost::math::tools::toms748_solve(
          [&](double z) { return ux(z); }, a, b, fa, fb,
          [](double l, double h) { return h - l <= 1e-14 * (1.0 + std::abs(l)); }, it);
      x = 0.5 * (r.first + r.second);
    } else {
      x = newton(a, b);
    }
    if (x && ts.u_jet(Complex(*x, 0.0), 0.0).uxx.real() < 0.0) found.push_back(*x);
  }

  // Sign changes of the centered difference; every changing cell is rescanned 16x
  // finer, so a pair of close extrema hidden in one coarse cell still separates.
  void scan(double lo, double hi, double step, int depth) {
    const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / step));
    std::vector<double> xs(n + 1), u(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      xs[i] = lo + static_cast<double>(i) * step;
      u[i] = real_u(ts, xs[i], 0.0);
    }
    // refined levels read the sign off the closed-form u_x: on a flat top the
    // differences there sink to rounding level
    std::vector<int> sg(n + 1, 0);
    for (std::size_t i = 1; i < n; ++i) {
      const double d = depth == 0 ? u[i + 1] - u[i - 1] : ux(xs[i]);
      sg[i] = (d > 0.0) - (d < 0.0);
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (sg[i] == sg[i + 1]) continue;
      if (std::max(std::abs(u[i]), std::abs(u[i + 1])) < floor_u) continue;
      const double a = xs[i - 1], b = xs[i + 2];
      if (depth < max_depth)
        scan(a, b, step / 16.0, depth + 1);
      else if (sg[i] > 0 && sg[i + 1] <= 0)
        settle(xs[i], xs[sg[i + 1] == 0 ? i + 2 : i + 1]);  // exact 0: the extremum is the grid point
    }
  }
};

}  // namespace

MaximaCount count_maxima_at_interaction(const SolitonConfig& cfg) {
  require_centered(cfg);
  const TwoSoliton ts(cfg);
  const double L = 30.0 / cfg.k1;
  const double step = cfg.strip_scale() / 200.0;
  const double peak = std::abs(real_u(ts, 0.0, 0.0)) + cfg.k2;
  MaxFinder f{.ts = ts, .floor_u = 1e-10 * peak};
  // odd number of points so that 0 is a grid point
  const double half = step * std::ceil(L / step);
  f.scan(-half, half, step, 0);

  std::sort(f.found.begin(), f.found.end());
  MaximaCount out;
  for (double x : f.found)
    if (out.positions.empty() || x - out.positions.back() > 1e-7) out.positions.push_back(x);
  out.count = static_cast<int>(out.positions.size());
  for (double x : out.positions) {
    double best = HUGE_VAL;
    for (double y : out.positions) best = std::min(best, std::abs(x + y));
    out.asymmetry = std::max(out.asymmetry, best);
  }
  return out;
}

namespace {

RatioBracket bisect(double lo, double hi, double width, const std::function<bool(double)>& above) {
  if (above(lo) || !above(hi)) throw PreconditionError("the initial ratios do not bracket the change");
  while (hi - lo > width) {
    const double m = 0.5 * (lo + hi);
    (above(m) ? hi : lo) = m;
  }
  return {lo, hi};
}

}  // namespace

RatioBracket maxima_transition(double lo, double hi, double width) {
  return bisect(lo, hi, width, [](double r) {
    return count_maxima_at_interaction(SolitonConfig::approximate(1.0, r, Variant::Plus)).count == 1;
  });
}

RatioBracket negative_speed_onset(double lo, double hi, double width) {
  return bisect(lo, hi, width, [](double r) {
    return measure_extremum_speed(SolitonConfig::approximate(1.0, r, Variant::Plus)).speed < 0.0;
  });
}

std::vector<SweepRow> interaction_sweep(Variant v, double r_lo, double r_hi, int n, double h) {
  if (n < 1 || !(r_lo > 1.0) || r_hi < r_lo)
    throw PreconditionError("sweep needs 1 < r_lo <= r_hi and n >= 1");
  std::vector<SweepRow> rows;
  for (int i = 0; i < n; ++i) {
    const double r = n == 1 ? r_lo : r_lo + (r_hi - r_lo) * i / (n - 1);
    const auto cfg = SolitonConfig::approximate(1.0, r, v);
    SweepRow row;
    row.ratio = r;
    row.maxima = count_maxima_at_interaction(cfg).count;
    row.uxx_closed = uxx_at_center(cfg);
    row.uxx_measured = measure_uxx(cfg, h).extrapolated;
    try {
      row.speed_closed = extremum_speed(cfg);
    } catch (const PreconditionError&) {
    }
    try {
      row.speed_measured = measure_extremum_speed(cfg, h).speed;
    } catch (const PreconditionError&) {
    }
    rows.push_back(row);
  }
  return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  report::CsvTable tab(
      {"ratio", "maxima", "uxx_closed", "uxx_measured", "speed_closed", "speed_measured"});
  auto opt = [](const std::optional<double>& v) { return v ? report::format_double(*v) : ""; };
  for (const auto& r : rows)
    tab.add_row({report::format_double(r.ratio), std::to_string(r.maxima),
                 report::format_double(r.uxx_closed), report::format_double(r.uxx_measured),
                 opt(r.speed_closed), opt(r.speed_measured)});
  return tab.str();
}

}  // namespace solpole
