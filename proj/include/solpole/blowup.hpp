#pragma once

// Complex-valued solutions u(x, t) = u+-(x - i alpha, t) on the real line that
// become singular when a pole crosses the line Im x = -alpha.

#include <string>
#include <vector>

#include <json.hpp>

#include "solpole/tracker.hpp"

namespace solpole {

struct Crossing {
  double t_star = 0.0;
  Complex x_star;               // the pole at t_star, Im x_star = -alpha
  double vertical_speed = 0.0;  // Im x'(t_star)
  bool tangential = false;      // |Im x'| below tolerance: not a clean crossing
};

// Every time the curve meets Im x = -alpha, in time order. Sign changes of
// Im x(t) + alpha over the samples are refined to 1e-12 in t; stretches lying on
// the line are reported once, flagged tangential.
std::vector<Crossing> all_crossings(const SolitonConfig& cfg, const PoleCurve& curve, double alpha);
// The first one; PreconditionError when there is none.
Crossing find_crossing(const SolitonConfig& cfg, const PoleCurve& curve, double alpha);

struct AlphaChoice {
  double alpha = 0.0;
  std::size_t curve_index = 0;
  int copy = 0;  // the crossing pole is curves[curve_index] shifted by 2 copy s i (s = strip scale)
  Crossing crossing;
  // every crossing of the line by any curve or its vertical lattice copies
  std::vector<Crossing> crossings;
};

// Candidates: midpoints between consecutive pole ordinates at the first sample
// time. Kept when every crossing is transversal and crossings are at least
// min_separation apart in t; the best keeps the slowest crossing fastest. The
// chosen crossing is the earliest one.
AlphaChoice select_alpha(const SolitonConfig& cfg, const std::vector<PoleCurve>& curves,
                         double min_separation = 0.1);

struct ProfileGrid {
  double x_lo = -30.0;
  double x_hi = 30.0;
  double spacing = kPi / 64.0;
  int refine_levels = 3;
};

// Centered on Re x_star, base spacing strip/64, wide enough for the k1 tails to
// fall below 1e-8 of the peak.
ProfileGrid default_grid(const SolitonConfig& cfg, const Crossing& crossing);

struct BlowupSample {
  double t = 0.0;
  double sup_abs_u = 0.0;
  double argmax_x = 0.0;
  double tail_rate = 0.0;  // mean of the fitted left and right decay rates
};

struct BlowupScenario {
  SolitonConfig cfg;
  double alpha = 0.0;
  PoleCurve crossing_pole;
  Crossing crossing;
  ProfileGrid grid;
  std::vector<BlowupSample> series;
};

// Tracks every oracle pole over [t_start, t_end] (exact mode), then picks alpha.
BlowupScenario build_scenario(const SolitonConfig& cfg, double t_start = -3.0,
                              double t_end = 3.0, const TrackOptions& opts = {});

// Same with a caller-chosen alpha: the earliest transversal crossing of the line by
// any tracked pole or lattice copy. PreconditionError when there is none.
BlowupScenario build_scenario_at(const SolitonConfig& cfg, double alpha, double t_start = -3.0,
                                 double t_end = 3.0, const TrackOptions& opts = {});

// sup over x in the grid of |u(x - i alpha, t)|: grid scan, refine_levels rounds of
// 16x refinement around the argmax, then Brent. PreconditionError if the grid
// boundary holds more than 1e-8 of the peak.
BlowupSample profile_at(const SolitonConfig& cfg, double alpha, const ProfileGrid& grid, double t);

// times must avoid t_star.
std::vector<BlowupSample> blowup_profile(const BlowupScenario& scenario,
                                         const std::vector<double>& times);

// t_star - 10^(-first_decade - k/per_decade), k = 0 .. decades*per_decade.
std::vector<double> approach_ladder(double t_star, double first_decade = 2.0, int decades = 3,
                                    int per_decade = 2, int side = -1);

struct BlowupFit {
  double exponent = 0.0;   // slope of log sup|u| against log |t - t_star|
  double amplitude = 0.0;  // sup|u| ~ amplitude |t - t_star|^exponent
  double r_squared = 0.0;
  double decades = 0.0;
  std::size_t points = 0;
};

// Needs 4 points over 2 decades; Error when R^2 < 0.99.
BlowupFit fit_blowup_rate(const std::vector<BlowupSample>& series, double t_star);

// Distance from Im x = -alpha to the nearest oracle pole at time t, over the
// fundamental strip and its neighbours (exact mode).
double line_clearance(const SolitonConfig& cfg, double alpha, double t);

struct CoupledResidual {
  double res_r = 0.0;      // r_t + r_xxx + 6(r^2 - s^2) r_x - 12 r s s_x
  double res_s = 0.0;      // s_t + s_xxx + 12 r s r_x + 6(r^2 - s^2) s_x
  double printed_r = 0.0;  // same with 2 in place of 12
  double printed_s = 0.0;
  Complex complex_residual;  // u_t + u_xxx + 6 u^2 u_x from the same stencil
  double scale = 0.0;        // largest term, for relative comparison
};

// Centered differences of step h on the shifted line, O(h^2). PreconditionError if
// a pole lies within ~5 h of the point (|F/F_x| estimate).
CoupledResidual coupled_system_residual(const SolitonConfig& cfg, double alpha, double x, double t,
                                        double h);

nlohmann::ordered_json to_json(const BlowupScenario& s);
nlohmann::ordered_json to_json(const BlowupFit& f);
std::string series_to_csv(const std::vector<BlowupSample>& series);

}  // namespace solpole
