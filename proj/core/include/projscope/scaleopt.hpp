#pragma once

#include <span>

#include "projscope/distance.hpp"
#include "projscope/metrics.hpp"
#include "projscope/projection.hpp"

namespace projscope {

/// The three pair sums that determine Stress(s * P) for every s > 0:
/// stress(s)^2 = (hh - 2 s hl + s^2 ll) / hh.
struct StressProfile {
  double hh = 0.0;  // sum_{i<j} d_ij^2
  double hl = 0.0;  // sum_{i<j} d_ij d'_ij
  double ll = 0.0;  // sum_{i<j} d'_ij^2

  static StressProfile from(const DistanceMatrix& d_high, const DistanceMatrix& d_low);
  double stress_at(double s) const;
};

/// argmin_s Stress(s * P) = sum d_ij d'_ij / sum d'_ij^2.
/// Throws ArgumentError if d_low is all zero.
double closed_form_stress_scale(const DistanceMatrix& d_high, const DistanceMatrix& d_low);

struct ScaleSearch {
  double s_min = 0.0;
  double s_max = 0.0;
  /// Relative: the search stops once the bracket is narrower than
  /// tolerance * its midpoint.
  double tolerance = 1e-6;
  double result_s = 1.0;
  double result_q = 0.0;
  /// The optimum sits on s_min or s_max.
  bool at_boundary = false;
};

/// Bounds [0.1 s*, 10 s*] around the closed-form stress scale s*.
ScaleSearch default_search(const StressProfile& profile, double tolerance = 1e-6);

/// Maximise Q(s * P) over [s_min, s_max] given metrics at s = 1. Only the
/// stress term depends on s. w3 == 0 returns s = 1 (clamped into the bounds);
/// w3 > 0 is maximised at an endpoint; w3 < 0 is minimised stress, found by
/// golden-section search. Never returns a point worse than s = 1 when s = 1
/// lies inside the bounds.
ScaleSearch optimize_scale(const StressProfile& profile, const MetricVector& at_unit_scale,
                           const WeightVector& w, ScaleSearch search);

struct ScaledProjection {
  Projection projection;
  ScaleSearch search;
  MetricVector before;
  MetricVector after;
};

/// Full projection-level operation: computes metrics, searches the scale,
/// multiplies the coordinates and re-measures. `search` with s_min == s_max == 0
/// selects default_search().
ScaledProjection optimal_scale(const DistanceMatrix& d_high, const Projection& projection,
                               std::span<const int> labels, const WeightVector& w,
                               ScaleSearch search = {}, int np_k = kDefaultNeighborhoodSize);

}  // namespace projscope
