#pragma once

// Shape of u+- at the interaction point (0, 0): second derivative, speed of the
// extremum through the center, and the number of maxima at t = 0.

#include <optional>
#include <string>
#include <vector>

#include "solpole/config.hpp"

namespace solpole {

// Closed forms:
//   u+_xx(0,0) = -(k2 - k1)(k1^2 - 3 k1 k2 + k2^2)
//   u-_xx(0,0) = -(k2 + k1)(k1^2 + 3 k1 k2 + k2^2)
double uxx_at_center(double k1, double k2, Variant v);
// Requires zero shifts.
double uxx_at_center(const SolitonConfig& cfg);

// y'(0) = -u_xt(0,0) / u_xx(0,0) in closed form:
//   (k1^4 -+ 3k1^3k2 + 3k1^2k2^2 -+ 3k1k2^3 + k2^4) / (k1^2 -+ 3k1k2 + k2^2)
// PreconditionError when the denominator vanishes (Plus, k2/k1 = (3 + sqrt 5)/2).
double extremum_speed(double k1, double k2, Variant v);
double extremum_speed(const SolitonConfig& cfg);

// Centered differences with step h and h/2, and their Richardson combination.
// h is dimensionless: the x step is h/k2 and the t step h/k2^3.
struct DerivativeEstimate {
  double coarse = 0.0;
  double fine = 0.0;
  double extrapolated = 0.0;
};

DerivativeEstimate measure_uxx(const SolitonConfig& cfg, double h);
DerivativeEstimate measure_uxt(const SolitonConfig& cfg, double h);

struct SpeedMeasurement {
  double uxx = 0.0;  // extrapolated
  double uxt = 0.0;
  double speed = 0.0;         // -uxt/uxx from the extrapolated values
  double speed_coarse = 0.0;  // step h, no extrapolation
  double speed_fine = 0.0;    // step h/2
};

// Finite differences of the evaluated u at the origin. PreconditionError on
// nonzero shifts or a vanishing second derivative.
SpeedMeasurement measure_extremum_speed(const SolitonConfig& cfg, double h = 1e-3);

struct MaximaCount {
  int count = 0;
  std::vector<double> positions;  // ascending
  double asymmetry = 0.0;         // worst distance of -x from the nearest maximum
};

// Local maxima of u(., 0) on the real line: sign changes of a centered difference
// with spacing strip/200, then Newton on u_x, refining cells whose Newton limit is
// not a maximum.
MaximaCount count_maxima_at_interaction(const SolitonConfig& cfg);

struct RatioBracket {
  double lo = 0.0;
  double hi = 0.0;
};

// k1 = 1, Plus: the ratio at which the count of maxima drops from 2 to 1,
// by bisection on the count.
RatioBracket maxima_transition(double lo = 2.0, double hi = 3.0, double width = 1e-4);
// k1 = 1, Plus: where the measured extremum speed turns negative.
RatioBracket negative_speed_onset(double lo = 2.0, double hi = 2.3, double width = 1e-6);

struct SweepRow {
  double ratio = 0.0;
  int maxima = 0;
  double uxx_closed = 0.0;
  double uxx_measured = 0.0;
  std::optional<double> speed_closed;  // empty at the singular ratio
  std::optional<double> speed_measured;
};

// k1 = 1, k2 = ratio over n evenly spaced ratios in [r_lo, r_hi].
std::vector<SweepRow> interaction_sweep(Variant v, double r_lo, double r_hi, int n,
                                        double h = 1e-3);
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

}  // namespace solpole
