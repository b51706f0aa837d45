#pragma once

// Continuation of pole trajectories t -> x(t), F(x(t), t) = 0, and the local
// analysis of the four-pole collisions of the exceptional configurations.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "solpole/kernel.hpp"

namespace solpole {

enum class SpeedClass { Slow, Fast };
enum class TimeDirection { MinusInfinity, PlusInfinity };

// Family of the large-time pole lattice: slow (index m) or fast (index n), odd index.
struct FamilyLabel {
  SpeedClass speed = SpeedClass::Slow;
  int index = 1;
  TimeDirection direction = TimeDirection::MinusInfinity;
  friend bool operator==(const FamilyLabel&, const FamilyLabel&) = default;
};

std::string to_string(const FamilyLabel& label);

enum class BranchClass { None, Cubic, Linear };
std::string_view to_string(BranchClass c);

struct CurveSample {
  double t = 0.0;
  Complex x;
  double abs_F = 0.0;  // |F| relative to the sum of the magnitudes of its terms
};

struct CurveFlags {
  bool exceptional_collision = false;
  BranchClass branch_class = BranchClass::None;
};

struct PoleCurve {
  Variant variant = Variant::Minus;
  std::vector<CurveSample> samples;  // strictly increasing t
  std::optional<FamilyLabel> family;
  CurveFlags flags;
  std::string stop_reason;
  // the collision point the curve was handed off at, if any
  std::optional<Complex> collision_point;

  const CurveSample& front() const { return samples.front(); }
  const CurveSample& back() const { return samples.back(); }
  // Linear interpolation in t (the samples are dense enough for plotting and bracketing).
  Complex at(double t) const;
};

// Value and first partials of the function whose zero is tracked, all carrying one
// common (arbitrary) scale, plus the magnitude used for relative tolerances.
struct ZeroEval {
  Complex f;
  Complex fx;
  Complex ft;
  double magnitude = 1.0;
};
using ZeroFunction = std::function<ZeroEval(Complex x, double t)>;

ZeroFunction zero_function_F(const SolitonConfig& cfg);
// The linear factor F1 (which = 0) or F2 (which = 1).
ZeroFunction zero_function_factor(const SolitonConfig& cfg, int which);

struct ExceptionalInfo {
  bool is_exceptional = false;
  double t_collision = 0.0;
  std::vector<Complex> points;  // collision points with q in [q_min, q_max]
};

// p1, p2 odd and p2 - p1 (Minus) or p2 + p1 (Plus) divisible by 4. Points are
// x0 + (1/2 + q) lambda pi i, (x0, t0) the interaction point. The default range is
// the fundamental strip.
ExceptionalInfo detect_exceptional(const SolitonConfig& cfg, int q_min = -1, int q_max = 0);

struct TrackOptions {
  double dt_initial = 1e-3;
  double dt_max = 0.05;
  // largest allowed move of x per step, in units of the strip scale
  double dx_max = 0.05;
  int max_newton = 20;
  // Newton iterations beyond which the next step is halved
  int slow_newton = 5;
  double residual_tol = 1e-12;
  // below this dt the tracker gives up (near-multiple root)...
  double dt_floor = 1e-8;
  // ...except near a declared collision, where it may go down to this
  double dt_floor_collision = 1e-12;
  // continuation stops once |t - t_collision| <= collision_time near a collision point
  double collision_time = 1e-6;
  // "near" = within this many strip scales of the collision point
  double collision_zone = 0.1;
  std::size_t max_steps = 1000000;
};

// Tracks the zero of F through (x_start, t_start) up to t_end (either direction).
PoleCurve track_curve(const SolitonConfig& cfg, Complex x_start, double t_start, double t_end,
                      const TrackOptions& opts = {});
// Same for an arbitrary function; collisions are declared by the caller.
PoleCurve track_zero(const ZeroFunction& fn, Variant variant, Complex x_start, double t_start,
                     double t_end, const TrackOptions& opts = {},
                     const ExceptionalInfo& collisions = {}, double strip_scale = kPi);

// All simple oracle poles at t_start, tracked to t_end (rational mode).
std::vector<PoleCurve> track_all(const SolitonConfig& cfg, double t_start, double t_end,
                                 const TrackOptions& opts = {});

struct BranchFit {
  BranchClass branch = BranchClass::None;
  Complex limit_estimate;  // extrapolated (x - xc)^3/(t - tc) or (x - xc)/(t - tc)
  Complex cubic_estimate;
  Complex linear_estimate;
  double cubic_score = 0.0;   // relative drift of the model quantity over the last decade
  double linear_score = 0.0;
};

// Needs a curve flagged exceptional_collision with samples spanning two decades of
// |t - tc| down to at most 1e-6.
BranchFit classify_branch(const PoleCurve& curve, const SolitonConfig& cfg);

// t -> -conj(x(-t)) about the interaction point (origin by default); conjugate
// symmetry plus evenness makes this a pole curve again. The family label is dropped.
PoleCurve mirror_curve(const PoleCurve& curve, const InteractionPoint& center = {});
// t -> conj(x(t))
PoleCurve conjugate_curve(const PoleCurve& curve);

// Im x reduced to (-s, s] for the period 2s (s = lambda pi in the commensurable case).
Complex wrap_to_strip(Complex x, double s);

std::string curve_to_csv(const PoleCurve& curve);
nlohmann::ordered_json to_json(const PoleCurve& curve);

}  // namespace solpole
