#pragma once

// The invariant suite behind `verify`: kernel identities, pole counts, residues,
// the vertical-motion results along tracked curves, translations, and the
// large-time families.

#include <cstdint>
#include <optional>
#include <vector>

#include "solpole/analysis.hpp"

namespace solpole {

// Pole curves over [t0, t1]. Exact mode: every oracle pole at t0. Approximate
// mode: leading-order family positions at min(t0, seed_time) with
// -pi/k1 < Im x <= pi/k1, tracked forward and trimmed to [t0, t1].
std::vector<PoleCurve> tracked_curves(const SolitonConfig& cfg, double t0, double t1,
                                      const TrackOptions& opts = {});

// Horizon of the family check: 30/(k1 (k2^2 - k1^2)), so that the slow/fast
// coupling is ~e^-30 at |t| = T. 10 for (1,2).
double verify_horizon(const SolitonConfig& cfg);

struct VerifyOptions {
  std::uint64_t seed = 20240607;
  int digits = 50;  // root finder precision, 50 or 100
  int probes = 100;
  // tracked window; default [-2T, 2T] with T = verify_horizon
  std::optional<double> t0;
  std::optional<double> t1;
};

struct VerifyReport {
  std::vector<InvariantResult> results;
  bool all_pass() const;
};

// Checks that do not apply to cfg come back with checkable = false. An exception
// inside a check is a failure, with the message in the note.
VerifyReport verify_suite(const SolitonConfig& cfg, const VerifyOptions& opts = {});

nlohmann::ordered_json to_json(const VerifyReport& r);

}  // namespace solpole
