#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "sinrlab/entropy.hpp"
#include "sinrlab/event.hpp"
#include "sinrlab/measure.hpp"
#include "sinrlab/model.hpp"

namespace sinrlab {

// Exhaustive enumeration stays under seconds up to 22 pairs (~4.2M edge
// sets); larger instances are refused, not approximated.
inline constexpr int kMaxEnumPairs = 22;

struct EnumInstance {
  PoweredPointSet points;
  std::vector<double> pair_q;  // Q per unordered pair, order (0,1),(0,2),...,(n-2,n-1)
  Partition partition;

  int pair_count() const {
    const int n = static_cast<int>(points.size());
    return n * (n - 1) / 2;
  }

  void validate() const {
    const int pairs = pair_count();
    if (pairs > kMaxEnumPairs)
      throw ConfigError("oracle: instance exceeds the " + std::to_string(kMaxEnumPairs) +
                        "-pair enumeration bound");
    if (static_cast<int>(pair_q.size()) != pairs)
      throw ConfigError("oracle: pair probability count mismatch");
    for (double q : pair_q)
      if (!(q > 0.0) || !(q < 1.0)) throw ConfigError("oracle: Q must lie in (0,1)");
  }

  static EnumInstance from_kernel(const PoweredPointSet& pts, const Kernel& connection,
                                  const Partition& part) {
    EnumInstance inst;
    inst.points = pts;
    inst.partition = part;
    const int n = static_cast<int>(pts.size());
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) inst.pair_q.push_back(connection(pts[i], pts[j]));
    inst.validate();
    return inst;
  }
};

// Visits all 2^pairs edge sets with their exact independent-edge
// probabilities. The visitor receives the edge bitmask (bit k = pair k).
inline void enumerate_networks(const EnumInstance& inst,
                               const std::function<void(std::uint32_t, double)>& visit) {
  inst.validate();
  const int pairs = inst.pair_count();
  std::vector<double> log_q(pairs), log_1mq(pairs);
  for (int k = 0; k < pairs; ++k) {
    log_q[k] = std::log(inst.pair_q[k]);
    log_1mq[k] = std::log1p(-inst.pair_q[k]);
  }
  const std::uint32_t count = 1u << pairs;
  for (std::uint32_t mask = 0; mask < count; ++mask) {
    double lp = 0.0;
    for (int k = 0; k < pairs; ++k) lp += (mask >> k) & 1u ? log_q[k] : log_1mq[k];
    visit(mask, std::exp(lp));
  }
}

// U_2 of the edge set encoded by `mask` on the instance's partition.
inline BinnedMeasure enum_u2(const EnumInstance& inst, std::uint32_t mask, double lambda,
                             double a_lambda) {
  SinrNetwork net;
  net.points = inst.points;
  net.lambda = lambda;
  net.a_lambda = a_lambda;
  const int n = static_cast<int>(inst.points.size());
  int k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j, ++k)
      if ((mask >> k) & 1u) net.edges.emplace_back(i, j);
  return empirical_connectivity_measure(net, inst.partition, lambda, a_lambda);
}

// Exact probability that U_2 falls in the event.
inline double exact_event_probability(const EventSpec& event, const EnumInstance& inst,
                                      double lambda, double a_lambda) {
  double p = 0.0;
  enumerate_networks(inst, [&](std::uint32_t mask, double prob) {
    if (event.contains(enum_u2(inst, mask, lambda, a_lambda))) p += prob;
  });
  return p;
}

struct CardinalityResult {
  std::uint64_t count = 0;       // edge sets whose U_2 lies in the event
  double bound = 0.0;            // exp(lambda^2 a_lambda h(nu))
  double log_count_rate = 0.0;   // log(count)/(lambda^2 a_lambda)
  double h_nu = 0.0;
};

// Exact cardinality for the McMillan-style sandwich; the point configuration
// is frozen, only edge sets are counted.
inline CardinalityResult exact_cardinality(const EventSpec& event, const EnumInstance& inst,
                                           double lambda, double a_lambda,
                                           const BinnedMeasure& q_pi_pi,
                                           EntropyRef2 ref2 = EntropyRef2::kQPiPi,
                                           double lambda_pi_pi_mass = 0.0) {
  CardinalityResult res;
  enumerate_networks(inst, [&](std::uint32_t mask, double) {
    if (event.contains(enum_u2(inst, mask, lambda, a_lambda))) ++res.count;
  });
  const double ref2_mass =
      ref2 == EntropyRef2::kQPiPi ? q_pi_pi.total() : lambda_pi_pi_mass;
  res.h_nu = network_entropy(event.center, q_pi_pi, ref2_mass);
  const double speed = lambda * lambda * a_lambda;
  res.bound = std::exp(speed * res.h_nu);
  res.log_count_rate = res.count > 0 ? std::log(static_cast<double>(res.count)) / speed : 0.0;
  return res;
}

}  // namespace sinrlab
