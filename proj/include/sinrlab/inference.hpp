#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "sinrlab/entropy.hpp"
#include "sinrlab/event.hpp"
#include "sinrlab/kernel.hpp"
#include "sinrlab/measure.hpp"
#include "sinrlab/model.hpp"
#include "sinrlab/report.hpp"
#include "sinrlab/rng.hpp"

namespace sinrlab {

struct WeightedSample {
  SinrNetwork network;
  double log_weight = 0.0;  // log dP/dP~ of the draw
};

// Q-driven generator: given points, each unordered pair is an edge
// independently with probability Q(x_i, x_j). This is the generator the LDP
// analysis is written for; the mechanistic SINR-threshold generator lives in
// model.hpp and is used for realism cross-checks.
inline SinrNetwork q_driven_network(const PoweredPointSet& points, const ModelParams& params,
                                    const Kernel& connection, std::uint64_t seed) {
  Rng rng(seed);
  SinrNetwork net;
  net.points = points;
  net.lambda = params.lambda;
  net.a_lambda = params.a_value();
  const int n = static_cast<int>(points.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.bernoulli(connection(points[i], points[j]))) net.edges.emplace_back(i, j);
  return net;
}

// Quenched point configuration: exactly round(lambda * ||mu||) i.i.d. points,
// the discrete stand-in for conditioning on U_1^lambda = pi.
inline PoweredPointSet quenched_points(const ModelParams& params, std::uint64_t seed) {
  Rng rng(seed);
  const auto n = static_cast<std::uint64_t>(
      std::llround(params.lambda * params.intensity.total_mass));
  const auto& dom = params.domain;
  PoweredPointSet pts;
  pts.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    for (;;) {
      std::vector<double> x(dom.dim);
      for (int k = 0; k < dom.dim; ++k)
        x[k] = rng.uniform(dom.bounds[k].first, dom.bounds[k].second);
      if (params.intensity.density(x) >= params.intensity.sup_density * rng.uniform()) {
        pts.push_back({std::move(x), rng.exponential(params.power_rate)});
        break;
      }
    }
  }
  return pts;
}

// Edge-and-pair part of the log likelihood:
// sum_E log(Q/(1-Q)) + sum_{i<j} log(1-Q). Diagonal factor excluded.
inline double edge_part_log_likelihood(const SinrNetwork& net, const Kernel& connection) {
  const int n = static_cast<int>(net.points.size());
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (auto& [i, j] : net.edges) adj[i][j] = adj[j][i] = true;
  double lp = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double Q = connection(net.points[i], net.points[j]);
      if (!(Q > 0.0) || !(Q < 1.0))
        return adj[i][j] == (Q >= 1.0) ? std::numeric_limits<double>::infinity()
                                       : -std::numeric_limits<double>::infinity();
      lp += adj[i][j] ? std::log(Q) - std::log1p(-Q) : 0.0;
      lp += std::log1p(-Q);
    }
  }
  return lp;
}

// Full log likelihood of a realized network under the Q-driven law:
// point terms log(mu (x) K density) plus the edge/pair terms.
inline double log_likelihood(const SinrNetwork& net, const ModelParams& params,
                             const Kernel& connection) {
  double lp = 0.0;
  const double c = params.power_rate;
  for (const auto& p : net.points) {
    const double dens = params.intensity.density(p.location) * c * std::exp(-c * p.power);
    if (!(dens > 0.0)) return -std::numeric_limits<double>::infinity();
    lp += std::log(dens);
  }
  return lp + edge_part_log_likelihood(net, connection);
}

// AEP statistic -log P(Z^lambda) / (a_lambda lambda^2 log lambda); its
// theoretical companion is <1, q (mu x K) (x) (mu x K)> by quadrature.
inline double aep_statistic(const SinrNetwork& net, const ModelParams& params,
                            const Kernel& connection) {
  if (!(params.lambda > 1.0)) throw ConfigError("aep: requires lambda > 1");
  const double denom =
      params.a_value() * params.lambda * params.lambda * std::log(params.lambda);
  return -log_likelihood(net, params, connection) / denom;
}

// Exponential tilting of the edge law. Each pair {i,j} is an edge with
// probability Q e^g / (1 - Q + Q e^g); the log weight is
// -sum_E g + sum_pairs log(1 - Q + Q e^g)  (= a_lambda h_lambda per pair).
inline WeightedSample tilted_edge_sampler(const TiltFunction& g, const PoweredPointSet& points,
                                          const ModelParams& params, const Kernel& connection,
                                          const Partition& part, std::uint64_t seed) {
  g.check_finite();
  Rng rng(seed);
  WeightedSample ws;
  ws.network.points = points;
  ws.network.lambda = params.lambda;
  ws.network.a_lambda = params.a_value();
  const int n = static_cast<int>(points.size());
  std::vector<int> bin(n);
  for (int i = 0; i < n; ++i) bin[i] = part.locate(points[i]);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double Q = connection(points[i], points[j]);
      const double gv = g.at(bin[i], bin[j]);
      // log(1 - Q + Q e^g), overflow-guarded for large g.
      double log_norm;
      if (gv > 500.0) {
        log_norm = gv + std::log(Q);
      } else {
        log_norm = std::log1p(Q * std::expm1(gv));
      }
      const double tilted_q = std::exp(std::log(Q) + gv - log_norm);
      if (rng.bernoulli(std::min(1.0, tilted_q))) {
        ws.network.edges.emplace_back(i, j);
        ws.log_weight -= gv;
      }
      ws.log_weight += log_norm;
    }
  }
  return ws;
}

struct ProbabilityEstimate {
  double probability = 0.0;
  double stderr_ = 0.0;
  std::uint64_t hits = 0;
  double ess = 0.0;
  bool flagged = false;
};

// Unnormalized importance-sampling estimate of P(U_2^lambda in event) with
// the point configuration frozen. g = 0 reduces to plain Monte Carlo.
inline ProbabilityEstimate importance_estimate(const EventSpec& event, const TiltFunction& g,
                                               const PoweredPointSet& points,
                                               const ModelParams& params,
                                               const Kernel& connection, const Partition& part,
                                               int trials, std::uint64_t seed) {
  if (trials < 100) throw ConfigError("importance_estimate: need >= 100 trials");
  const double a_l = params.a_value();
  double sum = 0.0, sum_sq = 0.0, wsum = 0.0, wsum_sq = 0.0, comp = 0.0;
  std::uint64_t hits = 0;
  for (int t = 0; t < trials; ++t) {
    const WeightedSample ws =
        tilted_edge_sampler(g, points, params, connection, part, derive_seed(seed, "is", 0, t));
    const BinnedMeasure u2 =
        empirical_connectivity_measure(ws.network, part, params.lambda, a_l);
    const double w = std::exp(ws.log_weight);
    wsum += w;
    wsum_sq += w * w;
    if (event.contains(u2)) {
      ++hits;
      double y = w - comp;
      double s = sum + y;
      comp = (s - sum) - y;
      sum = s;
      sum_sq += w * w;
    }
  }
  ProbabilityEstimate est;
  est.hits = hits;
  est.probability = sum / trials;
  const double var = std::max(0.0, sum_sq / trials - est.probability * est.probability);
  est.stderr_ = std::sqrt(var / trials);
  est.ess = wsum_sq > 0.0 ? wsum * wsum / wsum_sq : 0.0;
  est.flagged = hits == 0;
  return est;
}

enum class ScgfSpeed { kLinear, kQuadratic };

struct ScgfEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

// Scaled cumulant generating function estimate at speed lambda or
// lambda^2 a_lambda, conditional on a fixed point configuration. The exponent
// weights each unordered edge once (<g, U_2>/2 in the ordered-pair pairing),
// matching the binomial product the limits are computed from. Evaluated via
// log-sum-exp; the standard error comes from the delta method.
inline ScgfEstimate scgf_estimate(const TiltFunction& g, const PoweredPointSet& points,
                                  const ModelParams& params, const Kernel& connection,
                                  const Partition& part, ScgfSpeed speed_kind, int trials,
                                  std::uint64_t seed) {
  if (trials < 1000) throw ConfigError("scgf_estimate: need >= 1e3 trials");
  g.check_finite();
  const double a_l = params.a_value();
  const double speed = speed_kind == ScgfSpeed::kLinear
                           ? params.lambda
                           : params.lambda * params.lambda * a_l;
  const double u2_scale = 1.0 / (params.lambda * params.lambda * a_l);
  const int n = static_cast<int>(points.size());
  std::vector<int> bin(n);
  for (int i = 0; i < n; ++i) bin[i] = part.locate(points[i]);

  std::vector<double> exponents;
  exponents.reserve(trials);
  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, "scgf", 0, t));
    double gsum = 0.0;  // sum of g over realized edges, each edge once
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (rng.bernoulli(connection(points[i], points[j]))) gsum += g.at(bin[i], bin[j]);
    exponents.push_back(speed * gsum * u2_scale);
  }
  const double m = *std::max_element(exponents.begin(), exponents.end());
  double se = 0.0, se_sq = 0.0;
  for (double e : exponents) {
    const double v = std::exp(e - m);
    se += v;
    se_sq += v * v;
  }
  const double mean_shifted = se / trials;
  ScgfEstimate out;
  out.value = (m + std::log(mean_shifted)) / speed;
  const double var_shifted = std::max(0.0, se_sq / trials - mean_shifted * mean_shifted);
  out.stderr_ = std::sqrt(var_shifted / trials) / (mean_shifted * speed);
  return out;
}

struct DecayCell {
  double lambda = 0.0;
  ProbabilityEstimate estimate;
  double neg_log_rate = 0.0;  // -log P / (lambda^2 a_lambda)
};

// Per-lambda importance-sampled event probabilities and the regression slope
// of -log P against lambda^2 a_lambda, next to the theoretical (1/2) inf H.
inline RateReport decay_rate_estimate(const EventSpec& event, const BinnedMeasure& q_pi_pi_ref,
                                      const std::vector<double>& lambda_grid,
                                      const ModelParams& base_params,
                                      const std::function<ModelParams(double)>& params_at,
                                      const std::function<Kernel(const ModelParams&)>& kernel_at,
                                      const Partition& part, int trials, std::uint64_t seed) {
  if (lambda_grid.size() < 3) throw ConfigError("decay_rate: need >= 3 grid points");
  for (std::size_t i = 1; i < lambda_grid.size(); ++i)
    if (!(lambda_grid[i] > lambda_grid[i - 1]))
      throw ConfigError("decay_rate: lambda grid must be increasing");
  (void)base_params;

  // Tilt targeting the event center: g* = log(nu / (q pi (x) pi)) bin-wise.
  TiltFunction g = TiltFunction::constant(q_pi_pi_ref.bins(), 0.0);
  for (std::size_t i = 0; i < q_pi_pi_ref.cells(); ++i) {
    const double n = event.center.cell(i);
    const double mm = q_pi_pi_ref.cell(i);
    if (n > 0.0 && mm > 0.0) g.values[i] = std::log(n / mm);
    else if (n == 0.0 && mm > 0.0) g.values[i] = -30.0;
  }

  RateReport rep;
  rep.experiment = "ldp-decay";
  rep.lambda_grid = lambda_grid;
  rep.seed_root = seed;
  std::vector<double> xs, ys, ws;
  for (std::size_t li = 0; li < lambda_grid.size(); ++li) {
    const ModelParams p = params_at(lambda_grid[li]);
    const Kernel k = kernel_at(p);
    const PoweredPointSet pts = quenched_points(p, derive_seed(seed, "decay-points", li));
    const ProbabilityEstimate est = importance_estimate(
        event, g, pts, p, k, part, trials, derive_seed(seed, "decay-trials", li));
    const double speed = p.speed_quad();
    DecayCell cell;
    cell.lambda = p.lambda;
    cell.estimate = est;
    Estimate e{est.probability, est.stderr_, est.hits, est.ess, est.flagged};
    if (est.probability > 0.0 && !est.flagged) {
      cell.neg_log_rate = -std::log(est.probability) / speed;
      xs.push_back(speed);
      ys.push_back(-std::log(est.probability));
      // variance of log P via delta method
      ws.push_back(est.stderr_ / est.probability);
    } else {
      e.flagged = true;  // zero hits: excluded from the regression
    }
    rep.estimates.push_back(e);
  }
  if (xs.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    const double denom = n * sxx - sx * sx;
    rep.slope = (n * sxy - sx * sy) / denom;
    double var = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double coef = (n * xs[i] - sx) / denom;
      var += coef * coef * ws[i] * ws[i];
    }
    rep.slope_ci = 1.96 * std::sqrt(var);
  }
  rep.theory_target = event.half_inf_h(q_pi_pi_ref);
  return rep;
}

}  // namespace sinrlab
