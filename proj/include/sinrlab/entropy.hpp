#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sinrlab/measure.hpp"

namespace sinrlab {

// Extended real line [0, +inf] for rate-function values. Never NaN.
struct ExtendedReal {
  double value = 0.0;

  static ExtendedReal infinity() {
    return {std::numeric_limits<double>::infinity()};
  }
  static ExtendedReal finite(double v) {
    if (std::isnan(v)) throw ConfigError("ExtendedReal: NaN");
    return {v};
  }
  bool is_infinite() const { return std::isinf(value); }
  bool operator==(const ExtendedReal& o) const { return value == o.value; }
  bool operator<(const ExtendedReal& o) const { return value < o.value; }
};

// Bounded symmetric test function g on W x W, piecewise constant on bin pairs.
struct TiltFunction {
  int bins = 0;
  std::vector<double> values;  // ordered bin pairs, row-major

  static TiltFunction constant(int bins, double g0) {
    return {bins, std::vector<double>(static_cast<std::size_t>(bins) * bins, g0)};
  }
  double at(int a, int b) const { return values[static_cast<std::size_t>(a) * bins + b]; }
  void set(int a, int b, double v) {
    values[static_cast<std::size_t>(a) * bins + b] = v;
    values[static_cast<std::size_t>(b) * bins + a] = v;
  }
  void check_finite() const {
    for (double v : values)
      if (!std::isfinite(v)) throw ConfigError("tilt: values must be finite");
  }
};

// H(nu||m) = sum nu log(nu/m), with 0 log 0 := 0; +inf on absolute-continuity
// failure.
inline ExtendedReal relative_entropy(const BinnedMeasure& nu, const BinnedMeasure& m) {
  if (!nu.same_partition(m)) throw ConfigError("relative_entropy: partition mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < nu.cells(); ++i) {
    const double n = nu.cell(i);
    if (n == 0.0) continue;
    const double d = m.cell(i);
    if (d == 0.0) return ExtendedReal::infinity();
    s += n * std::log(n / d);
  }
  return ExtendedReal::finite(s);
}

// script-H(nu||m) = H(nu||m) + (||m|| - ||nu||) for ||nu|| > 0, +inf otherwise.
inline ExtendedReal h_divergence(const BinnedMeasure& nu, const BinnedMeasure& m) {
  if (!nu.same_partition(m)) throw ConfigError("h_divergence: partition mismatch");
  if (!(nu.total() > 0.0)) return ExtendedReal::infinity();
  const ExtendedReal h = relative_entropy(nu, m);
  if (h.is_infinite()) return h;
  return ExtendedReal::finite(h.value + (m.total() - nu.total()));
}

// Speed-lambda rate function: H(pi||ref) on the constraint nu = q pi (x) pi
// (within tol in sup-bin distance), +inf off the constraint.
inline ExtendedReal rate_speed1(const BinnedMeasure& pi, const BinnedMeasure& nu,
                                const BinnedMeasure& ref, const BinnedMeasure& q_pi_pi,
                                double tol) {
  if (!(tol > 0.0)) throw ConfigError("rate_speed1: tol must be positive");
  if (!nu.same_partition(q_pi_pi)) throw ConfigError("rate_speed1: partition mismatch");
  double sup = 0.0;
  for (std::size_t i = 0; i < nu.cells(); ++i)
    sup = std::max(sup, std::abs(nu.cell(i) - q_pi_pi.cell(i)));
  if (sup > tol) return ExtendedReal::infinity();
  return relative_entropy(pi, ref);
}

// Speed lambda^2 a_lambda rate function: (1/2) script-H(nu || q pi (x) pi).
inline ExtendedReal rate_speed2(const BinnedMeasure& nu, const BinnedMeasure& q_pi_pi) {
  const ExtendedReal h = h_divergence(nu, q_pi_pi);
  if (h.is_infinite()) return h;
  return ExtendedReal::finite(0.5 * h.value);
}

enum class EntropyRef2 { kQPiPi, kLambdaPiPi };

// Network entropy h(nu) = (||nu|| - ||ref2|| - <nu, log(nu/||qref||)>)/2.
// The log divides by the scalar total mass of qref, as displayed.
inline double network_entropy(const BinnedMeasure& nu, const BinnedMeasure& qref,
                              double ref2_mass) {
  const double qmass = qref.total();
  if (!(qmass > 0.0)) throw ConfigError("network_entropy: ||qref|| must be positive");
  double inner = 0.0;
  for (std::size_t i = 0; i < nu.cells(); ++i) {
    const double n = nu.cell(i);
    if (n == 0.0) continue;  // 0 log 0 := 0
    inner += n * std::log(n / qmass);
  }
  return (nu.total() - ref2_mass - inner) / 2.0;
}

// phi_q(g, pi) = <e^g - 1, q pi (x) pi>.
inline double spectral_potential(const TiltFunction& g, const BinnedMeasure& q_pi_pi) {
  g.check_finite();
  if (q_pi_pi.cells() != g.values.size())
    throw ConfigError("spectral_potential: partition mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < g.values.size(); ++i)
    s += std::expm1(g.values[i]) * q_pi_pi.cell(i);
  return s;
}

struct KullbackResult {
  ExtendedReal value;
  TiltFunction attained_g;  // maximizer (capped below where nu = 0)
};

// Kullback action sup_g { <g, nu> - phi_q(g, pi) }. The objective is concave
// and separable per bin pair; each term is maximized by a safeguarded Newton
// iteration. +inf when nu puts mass where q pi (x) pi has none.
inline KullbackResult kullback_action(const BinnedMeasure& nu, const BinnedMeasure& q_pi_pi,
                                      int max_iter = 100, double g_floor = -40.0) {
  if (!nu.same_partition(q_pi_pi)) throw ConfigError("kullback_action: partition mismatch");
  const int bins = nu.bins();
  TiltFunction g = TiltFunction::constant(bins, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < nu.cells(); ++i) {
    const double n = nu.cell(i);
    const double m = q_pi_pi.cell(i);
    if (m == 0.0) {
      if (n > 0.0) return {ExtendedReal::infinity(), g};  // unbounded direction
      continue;
    }
    if (n == 0.0) {
      // sup over gi of -(e^g - 1) m approaches m as g -> -inf; cap at g_floor.
      g.values[i] = g_floor;
      total += -std::expm1(g_floor) * m;
      continue;
    }
    // Maximize f(x) = n x - (e^x - 1) m; f'(x) = n - m e^x.
    double x = 0.0;
    for (int it = 0; it < max_iter; ++it) {
      const double grad = n - m * std::exp(x);
      if (std::abs(grad) < 1e-15 * std::max(n, m)) break;
      const double hess = -m * std::exp(x);
      double step = -grad / hess;
      step = std::clamp(step, -5.0, 5.0);  // safeguard the Newton step
      x += step;
    }
    g.values[i] = x;
    total += n * x - std::expm1(x) * m;
  }
  return {ExtendedReal::finite(total), g};
}

// inf of script-H(.||m) over the L1 (total-variation norm) ball of radius
// delta around nu. Separable convex problem: at the optimum every adjusted
// bin has |log(omega/m)| equal to a common multiplier, found by bisection.
inline ExtendedReal min_h_divergence_over_tv_ball(const BinnedMeasure& nu,
                                                  const BinnedMeasure& m, double delta) {
  if (!nu.same_partition(m)) throw ConfigError("tv-ball inf: partition mismatch");
  if (delta < 0.0) throw ConfigError("tv-ball inf: negative radius");
  // If the ball reaches m itself the infimum is 0.
  if (l1_distance(nu, m) <= delta) return ExtendedReal::finite(0.0);

  auto budget_used = [&](double mult) {
    double used = 0.0;
    for (std::size_t i = 0; i < nu.cells(); ++i) {
      const double n = nu.cell(i), mm = m.cell(i);
      if (mm == 0.0) {
        used += n;  // mass on null support always moves to 0
        continue;
      }
      const double hi = mm * std::exp(mult), lo = mm * std::exp(-mult);
      if (n > hi) used += n - hi;
      else if (n < lo) used += lo - n;
    }
    return used;
  };
  double lo = 0.0, hi = 1.0;
  while (budget_used(hi) > delta && hi < 1e6) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (budget_used(mid) > delta) lo = mid;
    else hi = mid;
  }
  const double mult = hi;
  double value = 0.0;
  for (std::size_t i = 0; i < nu.cells(); ++i) {
    const double n = nu.cell(i), mm = m.cell(i);
    double omega = n;
    if (mm == 0.0) {
      omega = 0.0;
    } else {
      omega = std::clamp(n, mm * std::exp(-mult), mm * std::exp(mult));
    }
    if (omega > 0.0) {
      if (mm == 0.0) return ExtendedReal::infinity();
      value += omega * std::log(omega / mm);
    }
    value += mm - omega;
  }
  return ExtendedReal::finite(std::max(0.0, value));
}

}  // namespace sinrlab
