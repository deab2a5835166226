#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "sinrlab/entropy.hpp"
#include "sinrlab/measure.hpp"

namespace sinrlab {

enum class EventKind { kTvBall, kHalfspace };

// Neighbourhood of a target measure nu in M(W x W):
//   tv_ball   : { omega : ||omega - nu||_1 <= radius }  (L1 over ordered pairs)
//   halfspace : { omega : <g, omega> > <g, nu> - radius/2 }
struct EventSpec {
  EventKind kind = EventKind::kTvBall;
  BinnedMeasure center;
  double radius = 0.0;
  TiltFunction tilt;  // halfspace only

  static EventSpec tv_ball(BinnedMeasure nu, double eps) {
    if (!(eps > 0.0)) throw ConfigError("event: radius must be positive");
    EventSpec e;
    e.kind = EventKind::kTvBall;
    e.center = std::move(nu);
    e.radius = eps;
    return e;
  }

  static EventSpec halfspace(BinnedMeasure nu, TiltFunction g, double eps) {
    if (!(eps > 0.0)) throw ConfigError("event: radius must be positive");
    g.check_finite();
    EventSpec e;
    e.kind = EventKind::kHalfspace;
    e.center = std::move(nu);
    e.tilt = std::move(g);
    e.radius = eps;
    return e;
  }

  static EventSpec whole_space(const Partition& part) {
    EventSpec e;
    e.kind = EventKind::kTvBall;
    e.center = BinnedMeasure::on_bin_pairs(part);
    e.radius = std::numeric_limits<double>::infinity();
    return e;
  }

  bool contains(const BinnedMeasure& omega) const {
    if (std::isinf(radius)) return true;
    if (kind == EventKind::kTvBall) return l1_distance(omega, center) <= radius;
    return pairing(tilt.values, omega) > pairing(tilt.values, center) - radius / 2.0;
  }

  // (1/2) inf of script-H(.||m) over the event, the LDP decay target. For TV
  // balls the separable convex infimum is solved exactly; for halfspaces the
  // infimum over a segment mesh from nu toward m is used.
  double half_inf_h(const BinnedMeasure& m, int mesh = 4096) const {
    if (std::isinf(radius)) return 0.0;
    if (kind == EventKind::kTvBall) {
      const ExtendedReal v = min_h_divergence_over_tv_ball(center, m, radius);
      return 0.5 * v.value;
    }
    // Boundary of the halfspace along nu -> m; the infimum sits where the
    // linear constraint becomes active (or at m if m is inside).
    if (pairing(tilt.values, m) > pairing(tilt.values, center) - radius / 2.0) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= mesh; ++k) {
      const double t = static_cast<double>(k) / mesh;
      BinnedMeasure omega = center;
      for (std::size_t i = 0; i < omega.cells(); ++i)
        omega.set_cell(i, (1.0 - t) * center.cell(i) + t * m.cell(i));
      if (!contains(omega)) continue;
      const ExtendedReal v = h_divergence(omega, m);
      if (!v.is_infinite()) best = std::min(best, 0.5 * v.value);
    }
    return best;
  }
};

}  // namespace sinrlab
