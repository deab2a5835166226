// Samples a marked Poisson configuration, builds the threshold network, and
// prints summary statistics plus the serialized form.

#include <iostream>

#include "sinrlab/measure.hpp"
#include "sinrlab/model.hpp"

int main(int argc, char** argv) {
  using namespace sinrlab;
  const double lambda = argc > 1 ? std::stod(argv[1]) : 60.0;
  const std::uint64_t seed = argc > 2 ? std::stoull(argv[2]) : 1;

  ModelParams params = ModelParams::defaults(Domain::unit_cube(2), lambda);
  params.noise = 0.0;
  const auto locations = sample_ppp(params, derive_seed(seed, "locations"));
  const PoweredPointSet points = assign_powers(locations, params, derive_seed(seed, "powers"));
  const SinrNetwork net = build_network(points, params);

  const Partition part = make_partition(params.domain, 2.0, 2, 2);
  const BinnedMeasure u1 = empirical_power_measure(net, part, lambda);
  const BinnedMeasure u2 =
      empirical_connectivity_measure(net, part, lambda, params.a_value());

  std::cerr << "lambda " << lambda << ": " << net.points.size() << " points, "
            << net.edges.size() << " edges\n"
            << "||U1|| = " << u1.total() << "  ||U2|| = " << u2.total() << "\n";
  write_network(std::cout, net, params);
  return 0;
}
