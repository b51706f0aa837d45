#include "solpole/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>

namespace solpole {

namespace {

using BF = boost::multiprecision::cpp_bin_float_100;
using BC = boost::multiprecision::cpp_complex_100;

constexpr Complex kI{0.0, 1.0};

bool minus_inf(const FamilyLabel& l) { return l.direction == TimeDirection::MinusInfinity; }

void require_odd(int index) {
  if (index % 2 == 0) throw PreconditionError("family index must be odd");
}

// +1 where the classical formulas carry the upper sign (Plus), -1 for Minus
double upper(const SolitonConfig& cfg) { return cfg.variant == Variant::Plus ? 1.0 : -1.0; }

double parity(int index) { return ((index - 1) / 2) % 2 == 0 ? 1.0 : -1.0; }

double speed_of(const SolitonConfig& cfg, SpeedClass s) {
  return s == SpeedClass::Slow ? cfg.k1 : cfg.k2;
}

// frame parameter r (Slow) or s (Fast) at normalized time tn
double frame_param(const SolitonConfig& cfg, SpeedClass s, double tn) {
  const double d = cfg.k2 * cfg.k2 - cfg.k1 * cfg.k1;
  return std::exp((s == SpeedClass::Slow ? cfg.k2 : cfg.k1) * d * tn);
}

// z0 / w0 of a t -> -inf label
Complex frame_root(const SolitonConfig& cfg, SpeedClass s, int index) {
  const double lg = std::log(cfg.gamma);
  if (s == SpeedClass::Slow) return {lg / cfg.k1, index * kPi / (2 * cfg.k1)};
  return {-lg / cfg.k2, index * kPi / (2 * cfg.k2)};
}

Complex predicted_normalized(const SolitonConfig& cfg, const FamilyLabel& label, double tn) {
  require_odd(label.index);
  if (minus_inf(label) ? tn >= 0.0 : tn <= 0.0)
    throw PreconditionError("time on the wrong side of the interaction for " + to_string(label));
  if (minus_inf(label)) {
    const double c = speed_of(cfg, label.speed);
    return c * c * tn + frame_root(cfg, label.speed, label.index);
  }
  return -std::conj(predicted_normalized(cfg, mirror_label(label), -tn));
}

Complex slope_minus_inf(const SolitonConfig& cfg, SpeedClass s, int index, bool printed) {
  const double k1 = cfg.k1, k2 = cfg.k2, g = cfg.gamma;
  const double d = k2 * k2 - k1 * k1;
  Complex base;
  if (s == SpeedClass::Slow)
    base = parity(index) * 4.0 * k2 / d * std::pow(g, -k2 / k1) *
           std::exp(Complex(0.0, -k2 * index * kPi / (2 * k1)));
  else
    base = parity(index) * 4.0 * k1 / d * std::pow(g, -k1 / k2) *
           std::exp(Complex(0.0, k1 * index * kPi / (2 * k2)));
  // printed: -+ base; the implicit-function derivative gives +-i base
  return printed ? -upper(cfg) * base : upper(cfg) * kI * base;
}

Complex slope(const SolitonConfig& cfg, const FamilyLabel& label, bool printed) {
  require_odd(label.index);
  if (minus_inf(label)) return slope_minus_inf(cfg, label.speed, label.index, printed);
  return -std::conj(slope_minus_inf(cfg, label.speed, -label.index, printed));
}

BF big_k(const std::optional<Rational>& exact, double value) {
  if (!exact) return BF(value);
  return BF(boost::multiprecision::numerator(*exact)) /
         BF(boost::multiprecision::denominator(*exact));
}

double wrapped_distance(const SolitonConfig& cfg, Complex a, Complex b) {
  if (!cfg.comm) return std::abs(a - b);
  return std::abs(wrap_to_strip(a - b, cfg.strip_scale()));
}

// +1 when Im(predicted) = +index pi/(2c), -1 when it is -index pi/(2c)
double im_sign(TimeDirection d) { return d == TimeDirection::MinusInfinity ? 1.0 : -1.0; }

int nearest_odd(double v) { return 2 * static_cast<int>(std::floor(v / 2.0)) + 1; }

// Shift v (Im = v pi/(2c)) by whole periods into the strip.
int canonical_index(const SolitonConfig& cfg, SpeedClass s, int index) {
  if (!cfg.comm) return index;
  const int period = 4 * (s == SpeedClass::Slow ? cfg.comm->p1 : cfg.comm->p2);
  const double c = speed_of(cfg, s);
  const double lp = cfg.strip_scale();
  while (index * kPi / (2 * c) > lp * (1 + 1e-12)) index -= period;
  while (index * kPi / (2 * c) <= -lp * (1 - 1e-12)) index += period;
  return index;
}

struct Candidate {
  FamilyLabel label;
  double distance = HUGE_VAL;
};

Candidate nearest_label(const SolitonConfig& cfg, TimeDirection dir, Complex x, double t) {
  const InteractionPoint ip = interaction_point(cfg);
  const Complex xw = cfg.comm ? wrap_to_strip(x - ip.x0, cfg.strip_scale()) + ip.x0 : x;
  Candidate best;
  for (SpeedClass s : {SpeedClass::Slow, SpeedClass::Fast}) {
    const double c = speed_of(cfg, s);
    // Im = v pi/(2c); the label index is v for t -> -inf and -v for t -> +inf
    const int center = nearest_odd(xw.imag() * 2 * c / kPi);
    for (int v : {center - 2, center, center + 2}) {
      const int vc = canonical_index(cfg, s, v);
      const FamilyLabel l{s, static_cast<int>(im_sign(dir)) * vc, dir};
      const double dist = wrapped_distance(cfg, x, predicted_pole(cfg, l, t));
      if (dist < best.distance) best = {l, dist};
    }
  }
  return best;
}

bool within(const PoleCurve& c, double t) {
  return !c.samples.empty() && t >= c.front().t && t <= c.back().t;
}

nlohmann::ordered_json complex_json(Complex z) { return {z.real(), z.imag()}; }

}  // namespace

Complex MovingFrame::coordinate(Complex x, double t) const {
  const InteractionPoint ip = interaction_point(cfg);
  const double c = speed_of(cfg, kind);
  return x - ip.x0 - c * c * (t - ip.t0);
}

double MovingFrame::parameter(double t) const {
  return frame_param(cfg, kind, t - interaction_point(cfg).t0);
}

Complex MovingFrame::eval(Complex q, double p) const {
  const double sg = cfg.sigma(), g2 = cfg.gamma * cfg.gamma;
  const Complex e1 = std::exp(-cfg.k1 * q), e2 = std::exp(-cfg.k2 * q);
  const Complex a = kind == SpeedClass::Slow ? 1.0 + sg * p * e1 * e2 : p + sg * e1 * e2;
  const Complex b = e1 - sg * p * e2;
  return a * a + g2 * b * b;
}

FamilyLabel mirror_label(const FamilyLabel& label) {
  return {label.speed, -label.index,
          minus_inf(label) ? TimeDirection::PlusInfinity : TimeDirection::MinusInfinity};
}

Complex predicted_pole(const SolitonConfig& cfg, const FamilyLabel& label, double t) {
  const InteractionPoint ip = interaction_point(cfg);
  return ip.x0 + predicted_normalized(cfg, label, t - ip.t0);
}

Complex tangent_slope(const SolitonConfig& cfg, const FamilyLabel& label) {
  return slope(cfg, label, false);
}

Complex tangent_slope_printed(const SolitonConfig& cfg, const FamilyLabel& label) {
  return slope(cfg, label, true);
}

Complex first_order_term(const SolitonConfig& cfg, const FamilyLabel& label, double t,
                         bool printed) {
  const double tn = t - interaction_point(cfg).t0;
  const double p = frame_param(cfg, label.speed, minus_inf(label) ? tn : -tn);
  return slope(cfg, label, printed) * p;
}

PolishedPole polish_pole(const SolitonConfig& cfg, const FamilyLabel& label, Complex x_approx,
                         double t) {
  require_odd(label.index);
  const InteractionPoint ip = interaction_point(cfg);
  Complex xn = x_approx - ip.x0;
  double tn = t - ip.t0;
  if (!minus_inf(label)) {
    // solve the mirror problem: x -> -conj(x), t -> -t
    const FamilyLabel ml = mirror_label(label);
    PolishedPole m = polish_pole(cfg, ml,
                                 ip.x0 - std::conj(xn), ip.t0 - tn);
    PolishedPole out;
    out.offset = -std::conj(m.offset);
    out.x = predicted_pole(cfg, label, t) + out.offset;
    out.iterations = m.iterations;
    return out;
  }
  if (tn >= 0.0) throw PreconditionError("time on the wrong side of the interaction");

  const BF k1 = big_k(cfg.k1_exact, cfg.k1), k2 = big_k(cfg.k2_exact, cfg.k2);
  const BF gamma = (k2 + k1) / (k2 - k1);
  const BF g2 = gamma * gamma;
  const BF pi = boost::math::constants::pi<BF>();
  const BF sg(cfg.sigma());
  const bool slow = label.speed == SpeedClass::Slow;
  const BF c = slow ? k1 : k2;
  const BF d = k2 * k2 - k1 * k1;
  const BF T(tn);
  const BF param = exp((slow ? k2 : k1) * d * T);
  const BC q0 = slow ? BC(log(gamma) / k1, BF(label.index) * pi / (2 * k1))
                     : BC(-log(gamma) / k2, BF(label.index) * pi / (2 * k2));
  BC delta = BC(BF(xn.real()) - c * c * T, BF(xn.imag())) - q0;

  const BF tol("1e-90");
  int it = 0;
  for (; it < 80; ++it) {
    const BC q = q0 + delta;
    const BC e1 = exp(-k1 * q), e2 = exp(-k2 * q);
    const BC f1 = slow ? e1 : BC(e1 / param), f2 = slow ? BC(e2 * param) : e2;
    const BC p1 = sg * f1;
    const BC a = BF(1) + p1 * f2, b = p1 - f2;
    const BC F = a * a + g2 * b * b;
    const BC Fq = BF(2) * a * (-(k1 + k2) * p1 * f2) + BF(2) * g2 * b * (-k1 * p1 + k2 * f2);
    const BC step = F / Fq;
    delta -= step;
    if (abs(step) < tol) break;
  }
  if (it == 80) throw ConvergenceError("extended-precision polish did not converge");

  PolishedPole out;
  out.offset = Complex(static_cast<double>(delta.real()), static_cast<double>(delta.imag()));
  out.x = predicted_pole(cfg, label, t) + out.offset;
  out.iterations = it + 1;
  return out;
}

double seed_time(const SolitonConfig& cfg, double tol) {
  if (!(tol > 0.0 && tol < 1.0)) throw PreconditionError("tolerance must lie in (0, 1)");
  // s = exp(k1 (k2^2 - k1^2) t) is the slower of the two decays (k1 < k2)
  const double rate = std::min(cfg.k1, cfg.k2) * std::abs(cfg.k2 * cfg.k2 - cfg.k1 * cfg.k1);
  return interaction_point(cfg).t0 + std::log(tol) / rate;
}

std::vector<Seed> asymptotic_seeds(const SolitonConfig& cfg, double t, double im_lo,
                                   double im_hi) {
  const InteractionPoint ip = interaction_point(cfg);
  if (t == ip.t0) throw PreconditionError("seed time must differ from the interaction time");
  const TimeDirection dir =
      t < ip.t0 ? TimeDirection::MinusInfinity : TimeDirection::PlusInfinity;
  std::vector<Seed> out;
  for (SpeedClass s : {SpeedClass::Slow, SpeedClass::Fast}) {
    const double c = speed_of(cfg, s);
    const int lo = static_cast<int>(std::floor(std::min(im_lo, im_hi) * 2 * c / kPi)) - 2;
    const int hi = static_cast<int>(std::ceil(std::max(im_lo, im_hi) * 2 * c / kPi)) + 2;
    for (int v = lo; v <= hi; ++v) {
      if (v % 2 == 0) continue;
      const FamilyLabel l{s, static_cast<int>(im_sign(dir)) * v, dir};
      const Complex x = predicted_pole(cfg, l, t);
      if (x.imag() > im_lo && x.imag() <= im_hi) out.push_back({l, x});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const Seed& a, const Seed& b) { return a.x.imag() < b.x.imag(); });
  return out;
}

MatchReport match_families(const std::vector<PoleCurve>& curves, const SolitonConfig& cfg,
                           double T) {
  if (!(T > 0.0)) throw PreconditionError("horizon must be positive");
  const InteractionPoint ip = interaction_point(cfg);
  MatchReport report;
  report.T = T;

  for (std::size_t i = 0; i < curves.size(); ++i) {
    const PoleCurve& curve = curves[i];
    bool any = false;
    for (TimeDirection dir : {TimeDirection::MinusInfinity, TimeDirection::PlusInfinity}) {
      const double sgn = dir == TimeDirection::MinusInfinity ? -1.0 : 1.0;
      const double t = ip.t0 + sgn * T;
      if (!within(curve, t)) continue;
      any = true;
      const Complex tracked = curve.at(t);
      const Candidate cand = nearest_label(cfg, dir, tracked, t);

      FamilyMatch m;
      m.curve = i;
      m.label = cand.label;
      const PolishedPole first = polish_pole(cfg, m.label, tracked, t);
      m.endpoint = first.x;
      m.tracked_gap = wrapped_distance(cfg, tracked, first.x);
      double t_last = t;
      Complex off_last = first.offset;
      m.ladder.push_back({t, std::abs(first.offset)});
      for (double h = 2 * T; within(curve, ip.t0 + sgn * h); h *= 2) {
        const double th = ip.t0 + sgn * h;
        const PolishedPole p = polish_pole(cfg, m.label, curve.at(th), th);
        m.ladder.push_back({th, std::abs(p.offset)});
        t_last = th;
        off_last = p.offset;
      }
      m.tangent_ratio = off_last / first_order_term(cfg, m.label, t_last);
      m.tangent_ratio_printed = off_last / first_order_term(cfg, m.label, t_last, true);

      report.max_residual = std::max(report.max_residual, m.ladder.front().residual);
      for (std::size_t k = 1; k < m.ladder.size(); ++k)
        if (!(m.ladder[k].residual < m.ladder[k - 1].residual)) report.residuals_decrease = false;
      report.matches.push_back(std::move(m));
    }
    if (!any) report.unmatched.push_back(i);
  }

  // bijection check per direction
  for (std::size_t a = 0; a < report.matches.size(); ++a)
    for (std::size_t b = a + 1; b < report.matches.size(); ++b) {
      const auto& ma = report.matches[a];
      const auto& mb = report.matches[b];
      if (!(ma.label == mb.label)) continue;
      std::ostringstream os;
      os << "ambiguous family match: curves " << ma.curve << " and " << mb.curve
         << " both nearest to " << to_string(ma.label) << " (residuals "
         << ma.ladder.front().residual << ", " << mb.ladder.front().residual << ")";
      throw Error(os.str());
    }
  return report;
}

nlohmann::ordered_json to_json(const MatchReport& report) {
  nlohmann::ordered_json j;
  j["T"] = report.T;
  j["max_residual"] = report.max_residual;
  j["residuals_decrease"] = report.residuals_decrease;
  nlohmann::ordered_json ms = nlohmann::ordered_json::array();
  for (const auto& m : report.matches) {
    nlohmann::ordered_json ladder = nlohmann::ordered_json::array();
    for (const auto& p : m.ladder) ladder.push_back({{"t", p.t}, {"residual", p.residual}});
    ms.push_back({{"curve", m.curve},
                  {"label", to_string(m.label)},
                  {"endpoint", complex_json(m.endpoint)},
                  {"tracked_gap", m.tracked_gap},
                  {"ladder", ladder},
                  {"tangent_ratio", complex_json(m.tangent_ratio)},
                  {"tangent_ratio_printed", complex_json(m.tangent_ratio_printed)}});
  }
  j["matches"] = ms;
  j["unmatched"] = report.unmatched;
  return j;
}

}  // namespace solpole
