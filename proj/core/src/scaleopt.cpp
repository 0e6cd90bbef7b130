#include "projscope/scaleopt.hpp"

#include <algorithm>
#include <cmath>

#include "projscope/error.hpp"

namespace projscope {
namespace {

constexpr double kInvPhi = 0.6180339887498948482;  // (sqrt(5) - 1) / 2

double q_at(const StressProfile& profile, const MetricVector& m, const WeightVector& w, double s) {
  MetricVector scaled = m;
  scaled.stress = profile.stress_at(s);
  return composite(scaled, w);
}

}  // namespace

StressProfile StressProfile::from(const DistanceMatrix& d_high, const DistanceMatrix& d_low) {
  if (d_high.size() != d_low.size()) throw ArgumentError("stress profile: distance matrices differ in size");
  StressProfile p;
  const std::size_t n = d_high.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double* h = d_high.row(i);
    const double* l = d_low.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      p.hh += h[j] * h[j];
      p.hl += h[j] * l[j];
      p.ll += l[j] * l[j];
    }
  }
  return p;
}

double StressProfile::stress_at(double s) const {
  if (hh <= 0.0) throw ArgumentError("stress: high-dimensional distances are all zero");
  return std::sqrt(std::max(0.0, hh - 2.0 * s * hl + s * s * ll) / hh);
}

double closed_form_stress_scale(const DistanceMatrix& d_high, const DistanceMatrix& d_low) {
  const StressProfile p = StressProfile::from(d_high, d_low);
  if (p.ll <= 0.0) throw ArgumentError("closed-form scale: projected distances are all zero");
  return p.hl / p.ll;
}

ScaleSearch default_search(const StressProfile& profile, double tolerance) {
  if (profile.ll <= 0.0 || profile.hl <= 0.0)
    throw ArgumentError("default scale bounds need a non-degenerate projection");
  const double s_star = profile.hl / profile.ll;
  ScaleSearch s;
  s.s_min = 0.1 * s_star;
  s.s_max = 10.0 * s_star;
  s.tolerance = tolerance;
  return s;
}

ScaleSearch optimize_scale(const StressProfile& profile, const MetricVector& at_unit_scale, const WeightVector& w,
                           ScaleSearch search) {
  if (!(search.s_min > 0.0) || !(search.s_min < search.s_max))
    throw ArgumentError("scale search needs 0 < s_min < s_max");
  if (!(search.tolerance > 0.0)) throw ArgumentError("scale search tolerance must be positive");

  const auto q = [&](double s) { return q_at(profile, at_unit_scale, w, s); };
  const bool unit_inside = search.s_min <= 1.0 && 1.0 <= search.s_max;

  if (w.w3 == 0.0) {
    search.result_s = std::clamp(1.0, search.s_min, search.s_max);
    search.result_q = q(search.result_s);
    search.at_boundary = !unit_inside;
    return search;
  }

  if (w.w3 > 0.0) {
    // Stress is convex in s, so a positive weight peaks on an endpoint.
    const double q_lo = q(search.s_min);
    const double q_hi = q(search.s_max);
    search.result_s = q_lo > q_hi ? search.s_min : search.s_max;
    search.result_q = std::max(q_lo, q_hi);
    search.at_boundary = true;
    return search;
  }

  double lo = search.s_min;
  double hi = search.s_max;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = q(x1);
  double f2 = q(x2);
  while (hi - lo > search.tolerance * 0.5 * (hi + lo)) {
    if (f1 >= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = q(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = q(x2);
    }
  }
  double best = 0.5 * (lo + hi);
  double best_q = q(best);
  if (unit_inside && q(1.0) >= best_q) {
    best = 1.0;
    best_q = q(1.0);
  }
  search.result_s = best;
  search.result_q = best_q;
  const double slack = search.tolerance * best;
  search.at_boundary = best - search.s_min <= slack || search.s_max - best <= slack;
  return search;
}

ScaledProjection optimal_scale(const DistanceMatrix& d_high, const Projection& projection,
                               std::span<const int> labels, const WeightVector& w, ScaleSearch search, int np_k) {
  const DistanceMatrix d_low = pairwise_distances(projection.coords);
  const StressProfile profile = StressProfile::from(d_high, d_low);

  ScaledProjection out;
  out.before = evaluate_projection(d_high, projection.coords, labels, np_k);
  if (search.s_min == 0.0 && search.s_max == 0.0) search = default_search(profile, search.tolerance);
  out.search = optimize_scale(profile, out.before, w, search);

  out.projection = projection;
  out.projection.coords *= out.search.result_s;
  out.projection.scale = projection.scale * out.search.result_s;
  out.after = evaluate_projection(d_high, out.projection.coords, labels, np_k);
  return out;
}

}  // namespace projscope
