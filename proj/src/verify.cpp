#include "solpole/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "solpole/asymptotics.hpp"
#include "solpole/exppoly.hpp"

namespace solpole {

std::vector<PoleCurve> tracked_curves(const SolitonConfig& cfg, double t0, double t1,
                                      const TrackOptions& opts) {
  if (!(t1 > t0)) throw PreconditionError("tracking needs t0 < t1");
  if (cfg.is_exact() && cfg.comm && cfg.has_zero_shifts()) return track_all(cfg, t0, t1, opts);

  const double ts = std::min(t0, seed_time(cfg));
  const double s = kPi / cfg.k1;
  std::vector<PoleCurve> out;
  for (const auto& seed : asymptotic_seeds(cfg, ts, -s, s)) {
    PoleCurve c = track_curve(cfg, seed.x, ts, t1, opts);
    std::erase_if(c.samples, [&](const CurveSample& sm) { return sm.t < t0; });
    if (c.samples.size() >= 2) out.push_back(std::move(c));
  }
  return out;
}

double verify_horizon(const SolitonConfig& cfg) {
  return 30.0 / (cfg.k1 * (cfg.k2 * cfg.k2 - cfg.k1 * cfg.k1));
}

bool VerifyReport::all_pass() const {
  return std::all_of(results.begin(), results.end(),
                     [](const InvariantResult& r) { return !r.checkable || r.pass; });
}

namespace {

InvariantResult not_applicable(const std::string& name, const std::string& why) {
  InvariantResult r;
  r.name = name;
  r.checkable = false;
  r.note = why;
  return r;
}

// Runs one check; any exception turns into a failed result.
InvariantResult guarded(const std::string& name, const std::function<InvariantResult()>& fn) {
  try {
    InvariantResult r = fn();
    r.name = name;
    return r;
  } catch (const std::exception& e) {
    InvariantResult r;
    r.name = name;
    r.pass = false;
    r.note = std::string("error: ") + e.what();
    return r;
  }
}

InvariantResult eqg_check(const SolitonConfig& cfg, std::mt19937_64& rng, int probes) {
  // dimensionless box: k2 x in (-3, 3), k2^3 t in (-0.5, 0.5)
  const double s = cfg.strip_scale(), k = cfg.k2;
  std::uniform_real_distribution<double> re(-3.0 / k, 3.0 / k), im(-s, s),
      tt(-0.5 / (k * k * k), 0.5 / (k * k * k));
  InvariantResult r;
  std::size_t skipped = 0;
  while (r.checked < static_cast<std::size_t>(probes) && skipped < 10u * probes) {
    const Complex x(re(rng), im(rng));
    const double t = tt(rng);
    // keep off the poles of g, where the two summands cancel to many digits
    const Complex p = cfg.sigma() * eval_f(cfg, 1, x, t), q = eval_f(cfg, 2, x, t);
    if (std::abs(1.0 + p * q) < 1e-2 * (1.0 + std::abs(p * q))) {
      ++skipped;
      continue;
    }
    try {
      const auto e = eqg_residual(cfg, x, t);
      const double rel = std::abs(e.value) / e.scale;
      ++r.checked;
      if (rel > r.worst) {
        r.worst = rel;
        r.witness_x = x;
        r.witness_t = t;
      }
    } catch (const PreconditionError&) {
      ++skipped;
    }
  }
  r.pass = r.checked == static_cast<std::size_t>(probes) && r.worst <= 1e-10;
  r.note = "relative residual of the g-equation; " + std::to_string(skipped) + " probes near poles of g redrawn";
  return r;
}

InvariantResult pde_order_check(const SolitonConfig& cfg, std::mt19937_64& rng) {
  // real-axis points, where u is pole-free; steps shrink with the k^3 time scale
  const double k = cfg.k2;
  std::uniform_real_distribution<double> re(-2.0 / k, 2.0 / k), tt(-0.5 / (k * k * k), 0.5 / (k * k * k));
  InvariantResult r;
  const double h = std::min(0.02, 0.1 / (k * k * k));
  std::vector<double> ratios;
  int tries = 0;
  while (ratios.size() < 11 && tries++ < 200) {
    const Complex x(re(rng), 0.0);
    const double t = tt(rng);
    const double a = std::abs(pde_residual(cfg, x, t, h));
    const double b = std::abs(pde_residual(cfg, x, t, h / 2));
    if (!(b > 1e-9)) continue;  // too small to show the leading error term
    ratios.push_back(a / b);
  }
  // u is real here, so the h^2 coefficient changes sign along curves in (x, t) and
  // single ratios near them mean nothing; the median is the observed order
  std::sort(ratios.begin(), ratios.end());
  r.checked = ratios.size();
  const double med = ratios.empty() ? 0.0 : ratios[ratios.size() / 2];
  r.worst = std::abs(med - 4.0);
  r.pass = !ratios.empty() && r.worst <= 0.2;
  std::ostringstream note;
  note << "median ratio " << med << " of finite-difference residuals under h -> h/2 (h = " << h
       << "), spread [" << (ratios.empty() ? 0.0 : ratios.front()) << ", "
       << (ratios.empty() ? 0.0 : ratios.back()) << "]";
  r.note = note.str();
  return r;
}

InvariantResult pole_count_check(const SolitonConfig& cfg, int digits) {
  const int expect = 2 * (cfg.comm->p1 + cfg.comm->p2);
  RootOptions ro;
  ro.digits = digits;
  InvariantResult r;
  std::ostringstream note;
  note << "expected " << expect << ";";
  for (double t : {-1.0, -0.1, 0.0, 0.1, 1.0}) {
    int total = 0;
    for (const auto& p : oracle_poles(cfg, t, ro)) total += p.multiplicity;
    ++r.checked;
    note << " t=" << t << ":" << total;
    const double dev = std::abs(total - expect);
    if (dev > r.worst || (total != expect && !r.witness_t)) {
      r.worst = dev;
      r.witness_t = t;
    }
    if (total != expect) r.pass = false;
  }
  r.note = note.str();
  return r;
}

InvariantResult residue_check(const SolitonConfig& cfg, int digits) {
  RootOptions ro;
  ro.digits = digits;
  const double t = 0.3;
  InvariantResult r;
  double contour_worst = 0.0;
  for (const auto& p : oracle_poles(cfg, t, ro)) {
    if (p.multiplicity != 1) continue;
    const auto res = residue_at_pole(cfg, p.x, t);
    const double dev = std::min(std::abs(res.value - Complex(0, 1)), std::abs(res.value + Complex(0, 1)));
    ++r.checked;
    contour_worst = std::max(contour_worst, std::abs(res.contour - res.value));
    if (dev > r.worst) {
      r.worst = dev;
      r.witness_x = res.x;
      r.witness_t = t;
    }
  }
  r.pass = r.checked > 0 && r.worst <= 1e-8 && contour_worst <= 1e-6;
  std::ostringstream note;
  note << "distance of 2 gamma G/F_x from {+i, -i} at t=0.3; contour cross-check worst "
       << contour_worst;
  r.note = note.str();
  return r;
}

InvariantResult real_line_check(const SolitonConfig& cfg) {
  InvariantResult r;
  double least = HUGE_VAL;
  for (double t : {-1.0, 0.0, 1.0})
    for (const auto& l : check_no_real_poles(cfg, t)) {
      ++r.checked;
      if (l.min_rel_F < least) {
        least = l.min_rel_F;
        r.witness_x = l.argmin;
        r.witness_t = t;
      }
    }
  r.worst = least;
  r.pass = least > 1e-6;
  r.note = "smallest relative |F| on Im x = 0 (and Im x = lambda pi); must stay away from 0";
  return r;
}

InvariantResult translation_check(const SolitonConfig& cfg, int probes) {
  const int p1 = cfg.comm->p1, p2 = cfg.comm->p2;
  InvariantResult r;
  if ((p1 + p2) % 2 == 1) {
    const auto tc = parity_translation_theta(cfg, probes);
    r.checked = tc.probes;
    r.worst = tc.max_residual;
    r.note = "mixed parity, theta = " + std::to_string(tc.theta);
  } else {
    OddParityTranslation oc;
    try {
      oc = odd_parity_translation(cfg, probes);
    } catch (const PreconditionError& e) {
      r.checkable = false;
      r.note = std::string("odd parity without a real reduction: ") + e.what();
      return r;
    }
    r.checked = oc.first.probes + oc.second.probes;
    r.worst = std::max(oc.first.max_residual, oc.second.max_residual);
    r.note = "odd parity, theta1 = " + std::to_string(oc.first.theta) +
             ", theta2 = " + std::to_string(oc.second.theta);
  }
  r.pass = r.worst < 1e-10;
  return r;
}

InvariantResult family_check(const SolitonConfig& cfg, const std::vector<PoleCurve>& curves,
                             double T) {
  const auto rep = match_families(curves, cfg, T);
  InvariantResult r;
  r.checked = rep.matches.size();
  r.worst = rep.max_residual;
  r.pass = rep.unmatched.empty() && rep.max_residual < 1e-3 && rep.residuals_decrease &&
           !rep.matches.empty();
  std::ostringstream note;
  note << rep.matches.size() << " family matches at |t| = " << T << ", " << rep.unmatched.size()
       << " unmatched, residuals " << (rep.residuals_decrease ? "decrease" : "do not decrease");
  r.note = note.str();
  return r;
}

}  // namespace

VerifyReport verify_suite(const SolitonConfig& cfg, const VerifyOptions& opts) {
  cfg.validate();
  if (opts.digits != 50 && opts.digits != 100)
    throw PreconditionError("precision must be 50 or 100 digits");
  VerifyReport rep;
  auto& out = rep.results;
  std::mt19937_64 rng(opts.seed);
  const bool oracle = cfg.is_exact() && cfg.comm && cfg.has_zero_shifts();

  out.push_back(guarded("eqg_residual", [&] { return eqg_check(cfg, rng, opts.probes); }));
  out.push_back(guarded("pde_second_order", [&] { return pde_order_check(cfg, rng); }));
  if (oracle) {
    out.push_back(guarded("pole_count", [&] { return pole_count_check(cfg, opts.digits); }));
    out.push_back(guarded("residues", [&] { return residue_check(cfg, opts.digits); }));
  } else {
    out.push_back(not_applicable("pole_count", "needs exact commensurable wavenumbers, zero shifts"));
    out.push_back(not_applicable("residues", "needs exact commensurable wavenumbers, zero shifts"));
  }
  out.push_back(guarded("no_real_poles", [&] { return real_line_check(cfg); }));

  const double T = verify_horizon(cfg);
  const double t0 = opts.t0.value_or(-2.0 * T), t1 = opts.t1.value_or(2.0 * T);
  std::vector<PoleCurve> curves;
  std::string track_error;
  try {
    curves = tracked_curves(cfg, t0, t1);
  } catch (const std::exception& e) {
    track_error = e.what();
  }
  auto on_curves = [&](const std::string& name,
                       const std::function<InvariantResult(const std::vector<PoleCurve>&)>& fn) {
    if (!track_error.empty()) {
      InvariantResult r;
      r.name = name;
      r.pass = false;
      r.note = "tracking failed: " + track_error;
      return r;
    }
    return guarded(name, [&] { return fn(curves); });
  };
  out.push_back(on_curves("sign_law", [&](const auto& c) { return sign_law_over_curves(cfg, c); }));
  out.push_back(
      on_curves("cos_identities", [&](const auto& c) { return cos_identities_over_curves(cfg, c); }));
  out.push_back(on_curves("cos_zero_lattice", [&](const auto& c) { return cos_zero_over_curves(cfg, c); }));

  if (!cfg.comm)
    out.push_back(not_applicable("translation", "needs commensurable wavenumbers"));
  else
    out.push_back(guarded("translation", [&] { return translation_check(cfg, opts.probes); }));

  if (oracle && !detect_exceptional(cfg).is_exceptional && t0 <= -T && t1 >= T)
    out.push_back(on_curves("asymptotic_families",
                            [&](const auto& c) { return family_check(cfg, c, T); }));
  else
    out.push_back(not_applicable("asymptotic_families",
                                 "needs exact mode, a non-exceptional configuration and a "
                                 "window covering [-T, T]"));
  return rep;
}

nlohmann::ordered_json to_json(const VerifyReport& r) {
  nlohmann::ordered_json j;
  j["all_pass"] = r.all_pass();
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& x : r.results) arr.push_back(to_json(x));
  j["invariants"] = arr;
  return j;
}

}  // namespace solpole
