#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sinrlab/rng.hpp"

namespace sinrlab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class BoundaryMode { kHard, kToroidal };

// Rectangular observation window in R^d.
struct Domain {
  int dim = 1;
  std::vector<std::pair<double, double>> bounds;  // per-axis closed intervals
  BoundaryMode boundary = BoundaryMode::kHard;

  static Domain box(std::vector<std::pair<double, double>> b,
                    BoundaryMode mode = BoundaryMode::kHard) {
    Domain d;
    d.dim = static_cast<int>(b.size());
    d.bounds = std::move(b);
    d.boundary = mode;
    d.validate();
    return d;
  }

  static Domain unit_cube(int dim, BoundaryMode mode = BoundaryMode::kHard) {
    return box(std::vector<std::pair<double, double>>(dim, {0.0, 1.0}), mode);
  }

  void validate() const {
    if (dim < 1 || bounds.size() != static_cast<std::size_t>(dim))
      throw ConfigError("domain: dimension/bounds mismatch");
    for (auto& [lo, hi] : bounds)
      if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
        throw ConfigError("domain: each interval must be nonempty and finite");
  }

  double volume() const {
    double v = 1.0;
    for (auto& [lo, hi] : bounds) v *= hi - lo;
    return v;
  }

  bool contains(const std::vector<double>& x) const {
    if (x.size() != static_cast<std::size_t>(dim)) return false;
    for (int k = 0; k < dim; ++k)
      if (x[k] < bounds[k].first || x[k] > bounds[k].second) return false;
    return true;
  }

  // Euclidean distance; toroidal mode wraps each axis.
  double distance(const std::vector<double>& a, const std::vector<double>& b) const {
    double s = 0.0;
    for (int k = 0; k < dim; ++k) {
      double d = std::abs(a[k] - b[k]);
      if (boundary == BoundaryMode::kToroidal) {
        const double len = bounds[k].second - bounds[k].first;
        d = std::min(d, len - d);
      }
      s += d * d;
    }
    return std::sqrt(s);
  }
};

// Spatial intensity: density, its integral over the domain, and a sup bound
// used for rejection sampling. Uniform intensities carry exact values.
struct Intensity {
  std::function<double(const std::vector<double>&)> density;
  double total_mass = 1.0;   // integral of the density over the domain
  double sup_density = 1.0;  // upper bound of the density on the domain

  static Intensity uniform(const Domain& dom, double mass) {
    if (!(mass > 0.0) || !std::isfinite(mass))
      throw ConfigError("intensity: mass must be positive and finite");
    const double rho = mass / dom.volume();
    Intensity mu;
    mu.density = [rho](const std::vector<double>&) { return rho; };
    mu.total_mass = mass;
    mu.sup_density = rho;
    return mu;
  }
};

enum class InterferenceMode { kExcludeSignal, kLiteral };

struct ModelParams {
  Domain domain;
  double lambda = 1.0;
  Intensity intensity;
  double power_rate = 1.0;      // exponential mark law rate c
  double pathloss_exponent = 2.0;
  std::function<double(double)> tau;    // threshold tau(eta)
  std::function<double(double)> gamma;  // interference factor gamma(eta)
  double noise = 0.0;                   // N0
  std::function<double(double)> a_lambda;
  InterferenceMode interference_mode = InterferenceMode::kExcludeSignal;

  static ModelParams defaults(Domain dom, double lambda) {
    ModelParams p;
    p.domain = std::move(dom);
    p.lambda = lambda;
    p.intensity = Intensity::uniform(p.domain, 1.0);
    p.tau = [](double) { return 1.0; };
    p.gamma = [](double) { return 1.0; };
    p.a_lambda = [](double l) { return 1.0 / std::sqrt(l); };
    p.validate();
    return p;
  }

  void validate() const {
    domain.validate();
    if (!(lambda > 0.0)) throw ConfigError("params: lambda must be positive");
    if (!(power_rate > 0.0)) throw ConfigError("params: power rate c must be positive");
    if (!(pathloss_exponent > 0.0)) throw ConfigError("params: path-loss exponent must be positive");
    if (noise < 0.0) throw ConfigError("params: noise must be nonnegative");
    if (!intensity.density || intensity.total_mass <= 0.0 ||
        !std::isfinite(intensity.total_mass))
      throw ConfigError("params: intensity not normalizable");
    if (!tau || !gamma || !a_lambda) throw ConfigError("params: tau/gamma/a_lambda unset");
    if (!(a_lambda(lambda) > 0.0)) throw ConfigError("params: a_lambda must be positive");
  }

  double a_value() const { return a_lambda(lambda); }
  double speed_quad() const { return lambda * lambda * a_value(); }
};

struct PoweredPoint {
  std::vector<double> location;
  double power = 0.0;  // eta > 0
};

using PoweredPointSet = std::vector<PoweredPoint>;

struct SinrNetwork {
  PoweredPointSet points;
  std::vector<std::pair<int, int>> edges;  // unordered pairs, stored i < j
  double lambda = 1.0;
  double a_lambda = 1.0;

  std::size_t pair_count() const {
    const std::size_t n = points.size();
    return n * (n - 1) / 2;
  }
};

// Poisson point process with rate measure lambda*pi on the domain.
// Deterministic given the seed.
inline std::vector<std::vector<double>> sample_ppp(const ModelParams& params,
                                                   std::uint64_t seed) {
  params.validate();
  Rng rng(seed);
  const double mean = params.lambda * params.intensity.total_mass;
  const std::uint64_t n = rng.poisson(mean);
  std::vector<std::vector<double>> pts;
  pts.reserve(n);
  const auto& dom = params.domain;
  const double sup = params.intensity.sup_density;
  for (std::uint64_t i = 0; i < n; ++i) {
    // Rejection sampling against the sup bound; exact for uniform densities.
    for (;;) {
      std::vector<double> x(dom.dim);
      for (int k = 0; k < dom.dim; ++k)
        x[k] = rng.uniform(dom.bounds[k].first, dom.bounds[k].second);
      if (params.intensity.density(x) >= sup * rng.uniform()) {
        pts.push_back(std::move(x));
        break;
      }
    }
  }
  return pts;
}

// I.i.d. exponential(c) powers attached to given locations.
inline PoweredPointSet assign_powers(const std::vector<std::vector<double>>& locations,
                                     const ModelParams& params, std::uint64_t seed) {
  if (!(params.power_rate > 0.0)) throw ConfigError("assign_powers: c must be positive");
  Rng rng(seed);
  PoweredPointSet out;
  out.reserve(locations.size());
  for (const auto& loc : locations)
    out.push_back({loc, rng.exponential(params.power_rate)});
  return out;
}

// beta(r) = r^{-ell}; +inf at r = 0.
inline double path_loss(double ell, double distance) {
  if (!(ell > 0.0)) throw ConfigError("path_loss: ell must be positive");
  if (distance < 0.0) throw ConfigError("path_loss: negative distance");
  if (distance == 0.0) return std::numeric_limits<double>::infinity();
  return std::pow(distance, -ell);
}

// SINR seen at rx for the signal of tx. The interference sum runs over
// I \ {rx} in literal mode (the displayed formula, transmitter included) and
// over I \ {rx, tx} in exclude-signal mode.
inline double sinr(int tx, int rx, const PoweredPointSet& points,
                   const ModelParams& params) {
  if (tx == rx) throw ConfigError("sinr: tx == rx");
  const auto& dom = params.domain;
  const double ell = params.pathloss_exponent;
  const double num =
      points[tx].power * path_loss(ell, dom.distance(points[tx].location, points[rx].location));
  double interference = 0.0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const int ki = static_cast<int>(k);
    if (ki == rx) continue;
    if (ki == tx && params.interference_mode == InterferenceMode::kExcludeSignal) continue;
    interference += points[k].power *
                    path_loss(ell, dom.distance(points[k].location, points[rx].location));
  }
  const double denom = params.noise + params.gamma(points[rx].power) * interference;
  if (std::isinf(num)) return std::isinf(denom) ? 0.0 : num;
  if (std::isinf(denom)) return 0.0;
  if (denom == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return num / denom;
}

struct BuildStats {
  std::size_t directed_tests = 0;
};

// Edge {i,j} present iff both directed SINR threshold tests pass.
inline SinrNetwork build_network(const PoweredPointSet& points, const ModelParams& params,
                                 BuildStats* stats = nullptr) {
  SinrNetwork net;
  net.points = points;
  net.lambda = params.lambda;
  net.a_lambda = params.a_value();
  const int n = static_cast<int>(points.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double s_ij = sinr(i, j, points, params);
      const double s_ji = sinr(j, i, points, params);
      if (stats) stats->directed_tests += 2;
      if (s_ij >= params.tau(points[j].power) && s_ji >= params.tau(points[i].power))
        net.edges.emplace_back(i, j);
    }
  }
  return net;
}

// Line-oriented network format:
//   d ell c N0 lambda a_lambda
//   index x1 ... xd eta        (one line per point)
//   i j                        (one line per edge)
inline void write_network(std::ostream& os, const SinrNetwork& net,
                          const ModelParams& params) {
  os.precision(17);
  os << params.domain.dim << ' ' << params.pathloss_exponent << ' ' << params.power_rate
     << ' ' << params.noise << ' ' << net.lambda << ' ' << net.a_lambda << '\n';
  for (std::size_t i = 0; i < net.points.size(); ++i) {
    os << i;
    for (double x : net.points[i].location) os << ' ' << x;
    os << ' ' << net.points[i].power << '\n';
  }
  for (auto& [i, j] : net.edges) os << i << ' ' << j << '\n';
}

inline SinrNetwork read_network(std::istream& is) {
  SinrNetwork net;
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("network: empty stream");
  int dim;
  {
    std::istringstream hs(line);
    double ell, c, n0;
    if (!(hs >> dim >> ell >> c >> n0 >> net.lambda >> net.a_lambda))
      throw ConfigError("network: bad header");
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<double> fields;
    double v;
    while (ls >> v) fields.push_back(v);
    if (fields.size() == static_cast<std::size_t>(dim) + 2) {
      PoweredPoint p;
      p.location.assign(fields.begin() + 1, fields.end() - 1);
      p.power = fields.back();
      net.points.push_back(std::move(p));
    } else if (fields.size() == 2) {
      net.edges.emplace_back(static_cast<int>(fields[0]), static_cast<int>(fields[1]));
    } else {
      throw ConfigError("network: unrecognized line: " + line);
    }
  }
  return net;
}

}  // namespace sinrlab
