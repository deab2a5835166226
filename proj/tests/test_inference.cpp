#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sinrlab/inference.hpp"
#include "sinrlab/oracle.hpp"

using namespace sinrlab;

namespace {

// Constant-Q setup: synthetic kernel with theta = 0 so every pair has the
// same connection probability a_lambda * kappa.
struct ConstSetup {
  ModelParams params;
  KernelPair kernel;
  Partition part;
  PoweredPointSet points;

  ConstSetup(double lambda, double kappa, int n_points)
      : params(ModelParams::defaults(Domain::unit_cube(2), lambda)),
        kernel(make_synthetic_kernel(params, kappa, 0.0)),
        part(make_partition(params.domain, std::numeric_limits<double>::infinity(), 1, 1)) {
    Rng rng(7);
    for (int i = 0; i < n_points; ++i)
      points.push_back({{rng.uniform(), rng.uniform()}, rng.exponential(1.0)});
  }
  double Q() const { return kernel.connection(points[0], points[1]); }
};

}  // namespace

TEST_CASE("q_driven_network: deterministic and frequency-correct") {
  ConstSetup s(16.0, 1.2, 2);  // Q = 0.25 * 1.2 = 0.3
  CHECK(s.Q() == doctest::Approx(0.3));
  const SinrNetwork a = q_driven_network(s.points, s.params, s.kernel.connection, 5);
  const SinrNetwork b = q_driven_network(s.points, s.params, s.kernel.connection, 5);
  CHECK(a.edges == b.edges);
  int edge_hits = 0;
  const int reps = 10000;
  for (int t = 0; t < reps; ++t)
    if (!q_driven_network(s.points, s.params, s.kernel.connection, derive_seed(1, "q", 0, t))
             .edges.empty())
      ++edge_hits;
  const double phat = static_cast<double>(edge_hits) / reps;
  const double sd = std::sqrt(0.3 * 0.7 / reps);
  CHECK(std::abs(phat - 0.3) < 4 * sd);
}

TEST_CASE("quenched_points: exact count, in-domain, deterministic") {
  ModelParams p = ModelParams::defaults(Domain::unit_cube(2), 37.0);
  const auto pts = quenched_points(p, 11);
  CHECK(pts.size() == 37);  // round(37 * 1)
  for (const auto& q : pts) {
    CHECK(p.domain.contains(q.location));
    CHECK(q.power > 0.0);
  }
  const auto again = quenched_points(p, 11);
  REQUIRE(again.size() == pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(again[i].location == pts[i].location);
    CHECK(again[i].power == pts[i].power);
  }
}

TEST_CASE("edge_part_log_likelihood: two-point hand values") {
  ConstSetup s(16.0, 1.2, 2);
  SinrNetwork with_edge, without;
  with_edge.points = without.points = s.points;
  with_edge.edges = {{0, 1}};
  CHECK(edge_part_log_likelihood(with_edge, s.kernel.connection) ==
        doctest::Approx(std::log(0.3)));
  CHECK(edge_part_log_likelihood(without, s.kernel.connection) ==
        doctest::Approx(std::log(0.7)));
}

TEST_CASE("edge likelihood normalizes over all edge sets") {
  ConstSetup s(16.0, 1.3, 4);
  double total = 0.0;
  EnumInstance inst = EnumInstance::from_kernel(s.points, s.kernel.connection, s.part);
  for (std::uint32_t mask = 0; mask < 64; ++mask) {
    SinrNetwork net;
    net.points = s.points;
    int k = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j, ++k)
        if ((mask >> k) & 1u) net.edges.emplace_back(i, j);
    total += std::exp(edge_part_log_likelihood(net, s.kernel.connection));
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  (void)inst;
}

TEST_CASE("log_likelihood: point terms on uniform intensity") {
  ConstSetup s(16.0, 1.2, 2);
  s.params.power_rate = 2.0;
  SinrNetwork net;
  net.points = s.points;
  double expect = 0.0;
  for (const auto& p : s.points) expect += std::log(2.0) - 2.0 * p.power;
  expect += std::log(0.7);  // no edge
  CHECK(log_likelihood(net, s.params, s.kernel.connection) == doctest::Approx(expect));
}

TEST_CASE("aep_statistic: definition and domain guard") {
  ConstSetup s(16.0, 1.2, 3);
  SinrNetwork net = q_driven_network(s.points, s.params, s.kernel.connection, 3);
  const double ll = log_likelihood(net, s.params, s.kernel.connection);
  const double denom = s.params.a_value() * 16.0 * 16.0 * std::log(16.0);
  CHECK(aep_statistic(net, s.params, s.kernel.connection) == doctest::Approx(-ll / denom));
  ModelParams bad = s.params;
  bad.lambda = 1.0;
  CHECK_THROWS_AS(aep_statistic(net, bad, s.kernel.connection), ConfigError);
}

TEST_CASE("tilted_edge_sampler: zero tilt reproduces the plain generator") {
  ConstSetup s(16.0, 1.2, 5);
  const TiltFunction g0 = TiltFunction::constant(1, 0.0);
  const WeightedSample ws =
      tilted_edge_sampler(g0, s.points, s.params, s.kernel.connection, s.part, 77);
  const SinrNetwork plain = q_driven_network(s.points, s.params, s.kernel.connection, 77);
  CHECK(ws.network.edges == plain.edges);
  CHECK(ws.log_weight == doctest::Approx(0.0));
}

TEST_CASE("tilted_edge_sampler: change of measure is unbiased") {
  // E~[w f(X)] = E[f(X)]: test with f = indicator of each edge count, against
  // the exact binomial law.
  ConstSetup s(16.0, 1.2, 4);  // 6 pairs, Q = 0.3
  const TiltFunction g = TiltFunction::constant(1, 0.8);
  const int reps = 40000;
  std::vector<double> wsum(7, 0.0);
  for (int t = 0; t < reps; ++t) {
    const WeightedSample ws = tilted_edge_sampler(g, s.points, s.params, s.kernel.connection,
                                                  s.part, derive_seed(9, "cm", 0, t));
    wsum[ws.network.edges.size()] += std::exp(ws.log_weight);
  }
  auto binom = [](int n, int k) {
    double v = 1.0;
    for (int i = 0; i < k; ++i) v = v * (n - i) / (i + 1);
    return v;
  };
  for (int k = 0; k <= 6; ++k) {
    const double exact = binom(6, k) * std::pow(0.3, k) * std::pow(0.7, 6 - k);
    CHECK(wsum[k] / reps == doctest::Approx(exact).epsilon(0.08));
  }
}

TEST_CASE("importance_estimate: plain Monte Carlo matches the exact oracle") {
  ConstSetup s(16.0, 1.2, 4);
  const double a_l = s.params.a_value();
  const double w = 1.0 / (16.0 * 16.0 * a_l);
  BinnedMeasure center = BinnedMeasure::on_bin_pairs(s.part);
  center.set(0, 0, 2.0 * 2 * w);  // two-edge shell
  const EventSpec shell = EventSpec::tv_ball(center, 0.5 * w);
  EnumInstance inst = EnumInstance::from_kernel(s.points, s.kernel.connection, s.part);
  const double exact = exact_event_probability(shell, inst, 16.0, a_l);

  const TiltFunction g0 = TiltFunction::constant(1, 0.0);
  const ProbabilityEstimate est = importance_estimate(shell, g0, s.points, s.params,
                                                      s.kernel.connection, s.part, 5000, 123);
  CHECK(std::abs(est.probability - exact) < 4 * est.stderr_);
  CHECK(est.ess == doctest::Approx(5000.0));  // unit weights
  CHECK(!est.flagged);
  CHECK_THROWS_AS(importance_estimate(shell, g0, s.points, s.params, s.kernel.connection,
                                      s.part, 50, 1),
                  ConfigError);
}

TEST_CASE("importance_estimate: tilted sampler agrees with the exact oracle") {
  ConstSetup s(16.0, 1.2, 4);
  const double a_l = s.params.a_value();
  const double w = 1.0 / (16.0 * 16.0 * a_l);
  BinnedMeasure center = BinnedMeasure::on_bin_pairs(s.part);
  center.set(0, 0, 2.0 * 5 * w);  // five-edge shell, rare under Q = 0.3
  const EventSpec shell = EventSpec::tv_ball(center, 0.5 * w);
  EnumInstance inst = EnumInstance::from_kernel(s.points, s.kernel.connection, s.part);
  const double exact = exact_event_probability(shell, inst, 16.0, a_l);

  const TiltFunction g = TiltFunction::constant(1, 1.5);
  const ProbabilityEstimate est = importance_estimate(shell, g, s.points, s.params,
                                                      s.kernel.connection, s.part, 5000, 321);
  CHECK(std::abs(est.probability - exact) < 4 * est.stderr_);
  CHECK(est.hits > 100);  // tilting makes the rare shell common
}

TEST_CASE("scgf_estimate: matches the closed-form binomial cumulant") {
  ConstSetup s(16.0, 1.2, 6);  // 15 pairs, Q = 0.3
  const double a_l = s.params.a_value();
  const double g0 = 0.5;
  const TiltFunction g = TiltFunction::constant(1, g0);
  const int pairs = 15;
  for (ScgfSpeed sk : {ScgfSpeed::kLinear, ScgfSpeed::kQuadratic}) {
    const double speed = sk == ScgfSpeed::kLinear ? 16.0 : 16.0 * 16.0 * a_l;
    const double c = speed * g0 / (16.0 * 16.0 * a_l);
    const double exact = pairs * std::log1p(0.3 * std::expm1(c)) / speed;
    const ScgfEstimate est = scgf_estimate(g, s.points, s.params, s.kernel.connection, s.part,
                                           sk, 20000, 55);
    CHECK(std::abs(est.value - exact) < 4 * est.stderr_ + 1e-12);
  }
  CHECK_THROWS_AS(scgf_estimate(g, s.points, s.params, s.kernel.connection, s.part,
                                ScgfSpeed::kLinear, 10, 1),
                  ConfigError);
}

TEST_CASE("decay_rate_estimate: report wiring on a small synthetic run") {
  ModelParams base = ModelParams::defaults(Domain::unit_cube(2), 16.0);
  Partition part =
      make_partition(base.domain, std::numeric_limits<double>::infinity(), 1, 1);
  auto params_at = [&](double l) {
    ModelParams p = base;
    p.lambda = l;
    return p;
  };
  auto kernel_at = [&](const ModelParams& p) {
    return make_synthetic_kernel(p, 0.4, 0.0).connection;
  };
  // reference m = q pi (x) pi with pi = mu (x) K (unit mass), q = 0.4
  BinnedMeasure m = BinnedMeasure::on_bin_pairs(part);
  m.set(0, 0, 0.4);
  BinnedMeasure center = m;
  center.set(0, 0, 0.4 * 1.8);
  const EventSpec ball = EventSpec::tv_ball(center, 0.05 * m.total());
  const std::vector<double> grid = {16.0, 32.0, 64.0};
  const RateReport rep = decay_rate_estimate(ball, m, grid, base, params_at, kernel_at, part,
                                             400, 2025);
  REQUIRE(rep.estimates.size() == 3);
  CHECK(rep.lambda_grid == grid);
  CHECK(rep.theory_target > 0.0);
  CHECK(std::isfinite(rep.slope));
  CHECK(rep.slope > 0.0);
  for (const auto& e : rep.estimates) {
    CHECK(e.value >= 0.0);
    CHECK(e.value <= 1.5);
  }
  CHECK_THROWS_AS(decay_rate_estimate(ball, m, {8.0, 4.0, 2.0}, base, params_at, kernel_at,
                                      part, 400, 1),
                  ConfigError);
}
