#include "solpole/tracker.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "solpole/exppoly.hpp"

namespace solpole {

std::string to_string(const FamilyLabel& label) {
  std::ostringstream os;
  os << (label.speed == SpeedClass::Slow ? "slow" : "fast") << ' '
     << (label.speed == SpeedClass::Slow ? "m=" : "n=") << label.index << ' '
     << (label.direction == TimeDirection::MinusInfinity ? "t->-inf" : "t->+inf");
  return os.str();
}

std::string_view to_string(BranchClass c) {
  switch (c) {
    case BranchClass::Cubic: return "cubic";
    case BranchClass::Linear: return "linear";
    default: return "none";
  }
}

Complex PoleCurve::at(double t) const {
  if (samples.empty() || t < samples.front().t || t > samples.back().t)
    throw PreconditionError("PoleCurve::at: time outside the sampled range");
  auto it = std::lower_bound(samples.begin(), samples.end(), t,
                             [](const CurveSample& s, double v) { return s.t < v; });
  if (it->t == t || it == samples.begin()) return it->x;
  const auto& b = *it;
  const auto& a = *(it - 1);
  const double w = (t - a.t) / (b.t - a.t);
  return a.x + w * (b.x - a.x);
}

ZeroFunction zero_function_F(const SolitonConfig& cfg) {
  auto sol = std::make_shared<TwoSoliton>(cfg);
  return [sol](Complex x, double t) {
    const double ls = sol->log_scale(x, t);
    return ZeroEval{sol->F(x, t, ls), sol->F(x, t, ls, 1, 0), sol->F(x, t, ls, 0, 1),
                    sol->F_magnitude(x, t, ls)};
  };
}

ZeroFunction zero_function_factor(const SolitonConfig& cfg, int which) {
  if (which != 0 && which != 1) throw PreconditionError("factor index must be 0 or 1");
  auto sol = std::make_shared<TwoSoliton>(cfg);
  return [sol, which](Complex x, double t) {
    const double ls = sol->log_scale(x, t);
    // the factor's own terms: 1, f1, f2, f1 f2 scaled by exp(-ls/2)
    const double e1 = sol->exponent(1, x, t).real(), e2 = sol->exponent(2, x, t).real();
    const double g = sol->config().gamma;
    const double mag = std::exp(-0.5 * ls) * (1.0 + g * std::exp(e1) + g * std::exp(e2)) +
                       std::exp(e1 + e2 - 0.5 * ls);
    return ZeroEval{sol->factor(which, x, t, ls), sol->factor(which, x, t, ls, 1, 0),
                    sol->factor(which, x, t, ls, 0, 1), mag};
  };
}

ExceptionalInfo detect_exceptional(const SolitonConfig& cfg, int q_min, int q_max) {
  ExceptionalInfo info;
  if (!cfg.comm) return info;
  const int p1 = cfg.comm->p1, p2 = cfg.comm->p2;
  if (p1 % 2 == 0 || p2 % 2 == 0) return info;
  const int d = cfg.variant == Variant::Minus ? p2 - p1 : p2 + p1;
  if (d % 4 != 0) return info;
  info.is_exceptional = true;
  const auto ip = interaction_point(cfg);
  info.t_collision = ip.t0;
  for (int q = q_min; q <= q_max; ++q)
    info.points.emplace_back(ip.x0, (0.5 + q) * cfg.comm->lambda * kPi);
  return info;
}

Complex wrap_to_strip(Complex x, double s) {
  const double period = 2.0 * s;
  double im = x.imag() - period * std::floor(x.imag() / period);  // [0, 2s)
  if (im > s) im -= period;
  return {x.real(), im};
}

namespace {

struct NewtonResult {
  bool ok = false;
  Complex x;
  int iterations = 0;
  ZeroEval last;
};

NewtonResult newton(const ZeroFunction& fn, Complex x, double t, const TrackOptions& opts) {
  NewtonResult r;
  for (int i = 0; i < opts.max_newton; ++i) {
    const ZeroEval ev = fn(x, t);
    r.last = ev;
    r.iterations = i;
    if (!std::isfinite(std::abs(ev.f)) || !std::isfinite(std::abs(ev.fx))) return r;
    if (std::abs(ev.f) <= opts.residual_tol * ev.magnitude) {
      r.ok = true;
      r.x = x;
      return r;
    }
    if (ev.fx == Complex(0.0, 0.0)) return r;
    const Complex step = ev.f / ev.fx;
    x -= step;
    if (std::abs(step) <= 4e-16 * std::max(1.0, std::abs(x))) {
      r.last = fn(x, t);
      r.ok = std::abs(r.last.f) <= 1e3 * opts.residual_tol * r.last.magnitude;
      r.x = x;
      r.iterations = i + 1;
      return r;
    }
  }
  return r;
}

// Nearest collision point (as a translate in the period copy of x) within the zone.
std::optional<Complex> near_collision(const ExceptionalInfo& info, Complex x, double strip,
                                      double zone) {
  if (!info.is_exceptional) return std::nullopt;
  std::optional<Complex> best;
  double best_d = zone * strip;
  for (const Complex& p : info.points) {
    const Complex diff = wrap_to_strip(x - p, strip);
    const double d = std::abs(diff);
    if (d < best_d) {
      best_d = d;
      best = x - diff;
    }
  }
  return best;
}

std::string sample_string(double t, Complex x) {
  std::ostringstream os;
  os.precision(17);
  os << "t=" << t << ", x=" << x.real() << (x.imag() < 0 ? "" : "+") << x.imag() << "i";
  return os.str();
}

}  // namespace

PoleCurve track_zero(const ZeroFunction& fn, Variant variant, Complex x_start, double t_start,
                     double t_end, const TrackOptions& opts, const ExceptionalInfo& collisions,
                     double strip) {
  PoleCurve curve;
  curve.variant = variant;
  const auto start = newton(fn, x_start, t_start, opts);
  if (!start.ok || std::abs(start.x - x_start) > 1e-3 * strip)
    throw PreconditionError("track: start point is not near a zero (" +
                            sample_string(t_start, x_start) + ")");
  Complex x = start.x;
  double t = t_start;
  std::vector<CurveSample> samples{{t, x, std::abs(start.last.f) / start.last.magnitude}};
  const double dir = t_end >= t_start ? 1.0 : -1.0;
  double dt = opts.dt_initial;
  double fx_rel = std::abs(start.last.fx) / start.last.magnitude;
  const double tc = collisions.t_collision;
  std::size_t steps = 0;

  while (dir * (t_end - t) > 0.0) {
    if (++steps > opts.max_steps)
      throw ConvergenceError("track: step budget exhausted at " + sample_string(t, x));
    const auto near = near_collision(collisions, x, strip, opts.collision_zone);
    const bool heading_in = near && dir * (tc - t) > 0.0;
    if (near && std::abs(t - tc) <= opts.collision_time) {
      curve.flags.exceptional_collision = true;
      curve.collision_point = near;
      curve.stop_reason = "collision";
      break;
    }
    double h = std::min(dt, dir * (t_end - t));
    if (heading_in) h = std::min(h, 0.5 * std::abs(tc - t));
    const ZeroEval here = fn(x, t);
    const Complex slope = -here.ft / here.fx;
    if (std::abs(slope) * h > opts.dx_max * strip) h = opts.dx_max * strip / std::abs(slope);
    const double floor = near ? opts.dt_floor_collision : opts.dt_floor;

    bool accepted = false;
    while (!accepted) {
      if (h < floor) {
        std::ostringstream os;
        os << "track: near-multiple-root, step fell below " << floor
           << "; last good sample " << sample_string(t, x);
        throw ConvergenceError(os.str());
      }
      const double tn = t + dir * h;
      const Complex pred = x + slope * (dir * h);
      const auto nr = newton(fn, pred, tn, opts);
      const double allowed = 0.5 * std::abs(pred - x) + 1e-9 * strip;
      const double fx_new = nr.ok ? std::abs(nr.last.fx) / nr.last.magnitude : 0.0;
      const bool fx_collapse = !near && nr.ok && fx_new < 0.1 * fx_rel;
      if (!nr.ok || std::abs(nr.x - pred) > allowed || fx_collapse) {
        h *= 0.5;
        continue;
      }
      accepted = true;
      x = nr.x;
      t = tn;
      if (dir * (t_end - t) < 1e-15 * std::max(1.0, std::abs(t_end))) t = t_end;
      fx_rel = fx_new;
      samples.push_back({t, x, std::abs(nr.last.f) / nr.last.magnitude});
      if (nr.iterations > opts.slow_newton) dt = 0.5 * h;
      else if (nr.iterations <= 2) dt = std::min(opts.dt_max, 1.5 * h);
      else dt = h;
    }
  }
  if (curve.stop_reason.empty()) curve.stop_reason = "end";
  if (dir < 0) std::reverse(samples.begin(), samples.end());
  curve.samples = std::move(samples);
  return curve;
}

PoleCurve track_curve(const SolitonConfig& cfg, Complex x_start, double t_start, double t_end,
                      const TrackOptions& opts) {
  const auto info = detect_exceptional(cfg, -2, 1);
  return track_zero(zero_function_F(cfg), cfg.variant, x_start, t_start, t_end, opts, info,
                    cfg.strip_scale());
}

std::vector<PoleCurve> track_all(const SolitonConfig& cfg, double t_start, double t_end,
                                 const TrackOptions& opts) {
  std::vector<PoleCurve> out;
  for (const auto& p : oracle_poles(cfg, t_start)) {
    if (p.multiplicity != 1)
      throw PreconditionError("track_all: multiple pole at the start time; pick another t_start");
    out.push_back(track_curve(cfg, p.x, t_start, t_end, opts));
  }
  return out;
}

namespace {

// Least squares q ~ c0 + c1 s + c2 s^2 with complex q and real s; returns c0.
Complex extrapolate(const std::vector<double>& s, const std::vector<Complex>& q) {
  std::array<std::array<double, 3>, 3> A{};
  std::array<Complex, 3> b{};
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::array<double, 3> row{1.0, s[i], s[i] * s[i]};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) A[r][c] += row[r] * row[c];
      b[r] += row[r] * q[i];
    }
  }
  // Gaussian elimination with partial pivoting
  for (int c = 0; c < 3; ++c) {
    int piv = c;
    for (int r = c + 1; r < 3; ++r)
      if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
    std::swap(A[c], A[piv]);
    std::swap(b[c], b[piv]);
    for (int r = c + 1; r < 3; ++r) {
      const double f = A[r][c] / A[c][c];
      for (int k = c; k < 3; ++k) A[r][k] -= f * A[c][k];
      b[r] -= f * b[c];
    }
  }
  std::array<Complex, 3> x{};
  for (int r = 2; r >= 0; --r) {
    Complex acc = b[r];
    for (int k = r + 1; k < 3; ++k) acc -= A[r][k] * x[k];
    x[r] = acc / A[r][r];
  }
  return x[0];
}

}  // namespace

BranchFit classify_branch(const PoleCurve& curve, const SolitonConfig& cfg) {
  const auto info = detect_exceptional(cfg);
  if (!info.is_exceptional)
    throw PreconditionError("classify_branch: configuration is not exceptional");
  if (!curve.flags.exceptional_collision || !curve.collision_point)
    throw PreconditionError("classify_branch: curve was not handed off at a collision");
  const Complex xc = *curve.collision_point;
  const double tc = info.t_collision;

  double tau_min = HUGE_VAL, tau_max = 0.0;
  for (const auto& s : curve.samples) {
    const double a = std::abs(s.t - tc);
    if (a == 0.0) continue;
    tau_min = std::min(tau_min, a);
    tau_max = std::max(tau_max, a);
  }
  if (tau_min > 1.01e-6 || tau_max < 100.0 * tau_min)
    throw PreconditionError(
        "classify_branch: need samples spanning two decades of |t - tc| down to 1e-6");

  std::vector<double> s;
  std::vector<Complex> qc, ql;
  Complex qc_min, ql_min, qc_dec, ql_dec;
  double best_dec = HUGE_VAL;
  for (const auto& smp : curve.samples) {
    const double tau = smp.t - tc;
    const double a = std::abs(tau);
    if (a == 0.0 || a > 100.0 * tau_min) continue;
    const Complex d = smp.x - xc;
    const Complex c = d * d * d / tau, l = d / tau;
    s.push_back(std::cbrt(a));
    qc.push_back(c);
    ql.push_back(l);
    if (a == tau_min) {
      qc_min = c;
      ql_min = l;
    }
    const double gap = std::abs(std::log(a / (10.0 * tau_min)));
    if (gap < best_dec) {
      best_dec = gap;
      qc_dec = c;
      ql_dec = l;
    }
  }
  if (s.size() < 4) throw PreconditionError("classify_branch: too few samples near the collision");

  BranchFit fit;
  auto drift = [](Complex a, Complex b) {
    return std::abs(a) > 0.0 ? std::abs(a - b) / std::abs(a) : HUGE_VAL;
  };
  fit.cubic_score = drift(qc_min, qc_dec);
  fit.linear_score = drift(ql_min, ql_dec);
  fit.cubic_estimate = extrapolate(s, qc);
  fit.linear_estimate = extrapolate(s, ql);
  const double lo = std::min(fit.cubic_score, fit.linear_score);
  const double hi = std::max(fit.cubic_score, fit.linear_score);
  if (hi < 2.0 * lo) {
    std::ostringstream os;
    os << "classify_branch: ambiguous fit (cubic estimate " << fit.cubic_estimate
       << ", drift " << fit.cubic_score << "; linear estimate " << fit.linear_estimate
       << ", drift " << fit.linear_score << ")";
    throw ConvergenceError(os.str());
  }
  if (fit.cubic_score < fit.linear_score) {
    fit.branch = BranchClass::Cubic;
    fit.limit_estimate = fit.cubic_estimate;
  } else {
    fit.branch = BranchClass::Linear;
    fit.limit_estimate = fit.linear_estimate;
  }
  return fit;
}

PoleCurve mirror_curve(const PoleCurve& curve, const InteractionPoint& center) {
  PoleCurve m = curve;
  m.family.reset();
  m.samples.clear();
  for (auto it = curve.samples.rbegin(); it != curve.samples.rend(); ++it)
    m.samples.push_back({2.0 * center.t0 - it->t, 2.0 * center.x0 - std::conj(it->x), it->abs_F});
  if (curve.collision_point) m.collision_point = 2.0 * center.x0 - std::conj(*curve.collision_point);
  return m;
}

PoleCurve conjugate_curve(const PoleCurve& curve) {
  PoleCurve c = curve;
  c.family.reset();
  for (auto& s : c.samples) s.x = std::conj(s.x);
  if (c.collision_point) c.collision_point = std::conj(*c.collision_point);
  return c;
}

namespace {

std::string flag_string(const PoleCurve& c) {
  std::string f;
  if (c.flags.exceptional_collision) f = "collision";
  if (c.flags.branch_class != BranchClass::None) {
    if (!f.empty()) f += '|';
    f += to_string(c.flags.branch_class);
  }
  return f;
}

}  // namespace

std::string curve_to_csv(const PoleCurve& curve) {
  std::string out = "t,re_x,im_x,abs_F,flags\r\n";
  const std::string flags = flag_string(curve);
  char buf[128];
  for (const auto& s : curve.samples) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,", s.t, s.x.real(), s.x.imag(),
                  s.abs_F);
    out += buf;
    out += flags;
    out += "\r\n";
  }
  return out;
}

nlohmann::ordered_json to_json(const PoleCurve& curve) {
  nlohmann::ordered_json j;
  j["variant"] = std::string(to_string(curve.variant));
  j["family"] = curve.family ? nlohmann::ordered_json(to_string(*curve.family)) : nullptr;
  j["flags"] = {{"exceptional_collision", curve.flags.exceptional_collision},
                {"branch_class", std::string(to_string(curve.flags.branch_class))}};
  j["stop_reason"] = curve.stop_reason;
  nlohmann::ordered_json samples = nlohmann::ordered_json::array();
  for (const auto& s : curve.samples) samples.push_back({s.t, s.x.real(), s.x.imag(), s.abs_F});
  j["samples"] = samples;
  return j;
}

}  // namespace solpole
