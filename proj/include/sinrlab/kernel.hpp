#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sinrlab/model.hpp"
#include "sinrlab/rng.hpp"

namespace sinrlab {

enum class QuadScheme { kMidpointGrid, kMonteCarlo };

struct QuadratureSpec {
  QuadScheme scheme = QuadScheme::kMidpointGrid;
  int resolution = 256;  // nodes per axis (grid) or sample count (MC)
  std::uint64_t seed = 0;

  void validate(int dim) const {
    if (scheme == QuadScheme::kMidpointGrid) {
      if (resolution < 2) throw ConfigError("quad: need >= 2 nodes per axis");
      double nodes = std::pow(static_cast<double>(resolution), dim);
      if (nodes > 5e7) throw ConfigError("quad: grid too large, use monte-carlo");
    } else if (resolution < 1000) {
      throw ConfigError("quad: need >= 1e3 monte-carlo samples");
    }
  }

  static QuadratureSpec defaults_for(int dim) {
    QuadratureSpec q;
    if (dim >= 3) {
      q.scheme = QuadScheme::kMonteCarlo;
      q.resolution = 100000;
    }
    return q;
  }
};

// Integrates f against the intensity measure pi(dz) over the domain.
inline double integrate_over_domain(const std::function<double(const std::vector<double>&)>& f,
                                    const ModelParams& params, const QuadratureSpec& quad) {
  const auto& dom = params.domain;
  quad.validate(dom.dim);
  if (quad.scheme == QuadScheme::kMidpointGrid) {
    double cell = 1.0;
    for (auto& [lo, hi] : dom.bounds) cell *= (hi - lo) / quad.resolution;
    std::vector<int> idx(dom.dim, 0);
    double sum = 0.0;
    for (;;) {
      std::vector<double> z(dom.dim);
      for (int k = 0; k < dom.dim; ++k) {
        const auto& [lo, hi] = dom.bounds[k];
        z[k] = lo + (hi - lo) * (idx[k] + 0.5) / quad.resolution;
      }
      sum += f(z) * params.intensity.density(z) * cell;
      int k = 0;
      while (k < dom.dim && ++idx[k] == quad.resolution) idx[k++] = 0;
      if (k == dom.dim) break;
    }
    return sum;
  }
  // Monte Carlo over the box, weighted by density and box volume.
  Rng rng(quad.seed == 0 ? derive_seed(0, "quadrature") : quad.seed);
  double sum = 0.0;
  for (int t = 0; t < quad.resolution; ++t) {
    std::vector<double> z(dom.dim);
    for (int k = 0; k < dom.dim; ++k)
      z[k] = rng.uniform(dom.bounds[k].first, dom.bounds[k].second);
    sum += f(z) * params.intensity.density(z);
  }
  return sum * dom.volume() / quad.resolution;
}

// q_lambda^D((x,eta_x),(y,eta_y)): the two-term symmetric integral over the
// domain against pi(dz).
inline double pairwise_q_integral(const PoweredPoint& x, const PoweredPoint& y,
                                  const ModelParams& params, const QuadratureSpec& quad) {
  const double dist = params.domain.distance(x.location, y.location);
  if (dist == 0.0) throw ConfigError("pairwise_q_integral: coincident locations");
  const double ell = params.pathloss_exponent;
  const double tx = params.tau(x.power) * params.gamma(x.power);
  const double ty = params.tau(y.power) * params.gamma(y.power);
  if (tx == 0.0 && ty == 0.0) return 0.0;
  const double dl = std::pow(dist, ell);
  auto term = [&](double tg, const std::vector<double>& z) {
    if (tg == 0.0) return 0.0;
    double zl = 0.0;
    for (double zk : z) zl += zk * zk;
    zl = std::pow(std::sqrt(zl), ell);
    return tg / (tg + zl / dl);
  };
  return integrate_over_domain(
      [&](const std::vector<double>& z) { return term(tx, z) + term(ty, z); }, params, quad);
}

// Q = e^{-lambda * q}.
inline double connection_probability(double lambda, double qval) {
  if (qval < 0.0) throw ConfigError("connection_probability: qval must be nonnegative");
  return std::exp(-lambda * qval);
}

enum class KernelKind { kQLambdaD, kQLambda, kLimitQ };

// A pairwise kernel on powered points. `q_limit` is the limiting kernel q,
// `connection` the connection probability Q^{z^lambda} at the params' lambda.
struct Kernel {
  KernelKind kind = KernelKind::kQLambda;
  std::function<double(const PoweredPoint&, const PoweredPoint&)> evaluator;

  double operator()(const PoweredPoint& a, const PoweredPoint& b) const {
    return evaluator(a, b);
  }
};

// Probabilities are clamped away from {0,1} so likelihood ratios stay finite.
inline constexpr double kQClamp = 1e-12;

struct KernelPair {
  Kernel limit_q;      // q(x,y)
  Kernel connection;   // Q^{z^lambda}(x,y) in (0,1)
};

// Synthetic-limit mode: q(x,y) = kappa * exp(-theta * |x-y|) and
// Q = min(1 - clamp, a_lambda * q). The limit a_lambda^{-1} Q -> q holds by
// construction, giving experiments a known ground truth.
inline KernelPair make_synthetic_kernel(const ModelParams& params, double kappa,
                                        double theta) {
  if (!(kappa > 0.0) || theta < 0.0)
    throw ConfigError("synthetic kernel: need kappa > 0, theta >= 0");
  const Domain dom = params.domain;
  auto q = [dom, kappa, theta](const PoweredPoint& a, const PoweredPoint& b) {
    return kappa * std::exp(-theta * dom.distance(a.location, b.location));
  };
  const double a_l = params.a_value();
  KernelPair kp;
  kp.limit_q = {KernelKind::kLimitQ, q};
  kp.connection = {KernelKind::kQLambda,
                   [q, a_l](const PoweredPoint& a, const PoweredPoint& b) {
                     return std::min(1.0 - kQClamp, std::max(kQClamp, a_l * q(a, b)));
                   }};
  return kp;
}

// Integral mode: Q = e^{-lambda q_lambda^D} with q_lambda^D evaluated by
// quadrature. Convergence of a_lambda^{-1} Q is checked empirically by
// limit_kernel_check, not assumed.
inline Kernel make_integral_kernel(const ModelParams& params, const QuadratureSpec& quad) {
  return {KernelKind::kQLambda, [params, quad](const PoweredPoint& a, const PoweredPoint& b) {
            const double qv = pairwise_q_integral(a, b, params, quad);
            const double Q = connection_probability(params.lambda, qv);
            return std::min(1.0 - kQClamp, std::max(kQClamp, Q));
          }};
}

struct LimitCheckReport {
  std::vector<double> lambdas;
  std::vector<double> scaled_values;  // a_lambda^{-1} Q at each lambda
  std::vector<double> rel_changes;    // successive relative differences
  double limit = 0.0;                 // extrapolated limit
  bool converged = false;
};

// Tracks a_lambda^{-1} Q along a lambda grid for a fixed pair. `q_at` maps a
// lambda value to the connection probability for the pair at that lambda.
inline LimitCheckReport limit_kernel_check(const std::function<double(double)>& q_at,
                                           const std::vector<double>& lambda_grid,
                                           const std::function<double(double)>& a_lambda) {
  if (lambda_grid.size() < 3) throw ConfigError("limit check: need >= 3 grid points");
  for (std::size_t i = 1; i < lambda_grid.size(); ++i)
    if (!(lambda_grid[i] > lambda_grid[i - 1]))
      throw ConfigError("limit check: lambda grid must be increasing");
  LimitCheckReport rep;
  rep.lambdas = lambda_grid;
  for (double l : lambda_grid) rep.scaled_values.push_back(q_at(l) / a_lambda(l));
  for (std::size_t i = 1; i < rep.scaled_values.size(); ++i) {
    const double prev = rep.scaled_values[i - 1];
    const double cur = rep.scaled_values[i];
    rep.rel_changes.push_back(std::abs(cur - prev) / std::max(std::abs(prev), 1e-300));
  }
  // Converged: successive relative changes shrink and the last one is small.
  // A sequence growing by a fixed factor has slowly *decreasing* relative
  // changes, so the non-increasing test alone is not enough.
  rep.converged = rep.rel_changes.back() < 0.05;
  for (std::size_t i = 1; i < rep.rel_changes.size(); ++i)
    if (rep.rel_changes[i] > rep.rel_changes[i - 1] + 1e-12) rep.converged = false;
  rep.limit = rep.scaled_values.back();
  // Aitken extrapolation when the differences behave geometrically.
  const std::size_t m = rep.scaled_values.size();
  const double d1 = rep.scaled_values[m - 2] - rep.scaled_values[m - 3];
  const double d2 = rep.scaled_values[m - 1] - rep.scaled_values[m - 2];
  if (std::abs(d2 - d1) > 1e-14 && std::abs(d2) < std::abs(d1)) {
    rep.limit = rep.scaled_values[m - 1] - d2 * d2 / (d2 - d1);
  }
  if (!std::isfinite(rep.scaled_values.back())) rep.converged = false;
  return rep;
}

}  // namespace sinrlab
