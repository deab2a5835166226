#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sinrlab/measure.hpp"

using namespace sinrlab;

namespace {

ModelParams unit_params(double lambda) {
  return ModelParams::defaults(Domain::unit_cube(2), lambda);
}

}  // namespace

TEST_CASE("make_partition: validation") {
  Domain dom = Domain::unit_cube(2);
  CHECK_THROWS_AS(make_partition(dom, 1.0, 0, 1), ConfigError);
  CHECK_THROWS_AS(make_partition(dom, 0.0, 2, 1), ConfigError);
  CHECK_THROWS_AS(make_partition(dom, std::numeric_limits<double>::infinity(), 2, 3),
                  ConfigError);
  const Partition p = make_partition(dom, 2.0, 3, 4);
  CHECK(p.domain_cells() == 9);
  CHECK(p.power_bins() == 5);  // 4 regular + overflow
  CHECK(p.size() == 45);
}

TEST_CASE("partition locate: boundaries and overflow") {
  Partition p = make_partition(Domain::unit_cube(1), 2.0, 2, 2);
  CHECK(p.locate_domain_cell({0.25}) == 0);
  CHECK(p.locate_domain_cell({0.75}) == 1);
  CHECK(p.locate_domain_cell({1.0}) == 1);  // right boundary stays inside
  CHECK_THROWS_AS(p.locate_domain_cell({1.5}), ConfigError);
  CHECK(p.locate_power_bin(0.5) == 0);
  CHECK(p.locate_power_bin(1.5) == 1);
  CHECK(p.locate_power_bin(2.0) == 1);
  CHECK(p.locate_power_bin(3.0) == 2);  // overflow
  CHECK_THROWS_AS(p.locate_power_bin(0.0), ConfigError);

  Partition inf = make_partition(Domain::unit_cube(1), std::numeric_limits<double>::infinity(),
                                 2, 1);
  CHECK(inf.locate_power_bin(1e9) == 0);
}

TEST_CASE("power_bin_mass sums to one over the bins") {
  Partition p = make_partition(Domain::unit_cube(2), 3.0, 2, 5);
  for (double c : {0.5, 1.0, 2.0}) {
    double s = 0.0;
    for (int b = 0; b < p.power_bins(); ++b) s += power_bin_mass(p, b, c);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("empirical_power_measure: exact mass identity") {
  ModelParams mp = unit_params(50.0);
  const auto pts = assign_powers(sample_ppp(mp, 3), mp, 4);
  SinrNetwork net;
  net.points = pts;
  net.lambda = mp.lambda;
  Partition p = make_partition(mp.domain, 2.0, 2, 2);
  const BinnedMeasure u1 = empirical_power_measure(net, p, mp.lambda);
  CHECK(u1.total() == static_cast<double>(pts.size()) / mp.lambda);  // exact
  // every point lands in exactly one bin
  double s = 0.0;
  for (int b = 0; b < p.size(); ++b) s += u1.at(b) * mp.lambda;
  CHECK(s == doctest::Approx(static_cast<double>(pts.size())).epsilon(1e-12));
}

TEST_CASE("empirical_power_measure: law of large numbers") {
  ModelParams mp = unit_params(20000.0);
  const auto pts = assign_powers(sample_ppp(mp, 13), mp, 14);
  SinrNetwork net;
  net.points = pts;
  Partition p = make_partition(mp.domain, 2.0, 2, 2);
  const BinnedMeasure u1 = empirical_power_measure(net, p, mp.lambda);
  const BinnedMeasure ref = reference_power_measure(p, mp);
  for (int b = 0; b < p.size(); ++b) {
    const double sd = std::sqrt(ref.at(b) / mp.lambda);
    CHECK(std::abs(u1.at(b) - ref.at(b)) < 4 * sd + 1e-9);
  }
}

TEST_CASE("empirical_connectivity_measure: symmetry and exact mass identity") {
  ModelParams mp = unit_params(100.0);
  SinrNetwork net;
  net.points = {{{0.1, 0.1}, 0.5}, {{0.9, 0.9}, 1.5}, {{0.2, 0.8}, 3.0}};
  net.edges = {{0, 1}, {1, 2}};
  const double a_l = mp.a_value();
  Partition p = make_partition(mp.domain, 2.0, 2, 2);
  const BinnedMeasure u2 = empirical_connectivity_measure(net, p, mp.lambda, a_l);
  CHECK(u2.rank() == 2);
  CHECK(u2.total() == 2.0 * 2 / (mp.lambda * mp.lambda * a_l));  // exact
  for (int a = 0; a < p.size(); ++a)
    for (int b = 0; b < p.size(); ++b) CHECK(u2.at(a, b) == u2.at(b, a));
}

TEST_CASE("pairing: ordered-pair sum") {
  BinnedMeasure nu("p", 2, 2);
  nu.set(0, 1, 0.25);  // sets both (0,1) and (1,0)
  nu.set(0, 0, 0.5);
  std::vector<double> g = {1.0, 2.0, 2.0, 3.0};  // row-major on 2x2
  CHECK(pairing(g, nu) == doctest::Approx(0.5 * 1.0 + 0.25 * 2.0 + 0.25 * 2.0));
}

TEST_CASE("l1_distance: basics and partition mismatch") {
  BinnedMeasure a("p", 3, 1), b("p", 3, 1);
  a.set(0, 1.0);
  b.set(2, 0.5);
  CHECK(l1_distance(a, b) == doctest::Approx(1.5));
  CHECK(l1_distance(a, a) == 0.0);
  BinnedMeasure c("other", 3, 1);
  CHECK_THROWS_AS(l1_distance(a, c), ConfigError);
}

TEST_CASE("reference_power_measure: uniform intensity, exact cell masses") {
  ModelParams mp = unit_params(1.0);
  mp.power_rate = 2.0;
  Partition p = make_partition(mp.domain, 1.0, 2, 2);
  const BinnedMeasure ref = reference_power_measure(p, mp);
  CHECK(ref.total() == doctest::Approx(1.0).epsilon(1e-12));
  // each of the 4 cells carries 1/4 of the spatial mass
  for (int c = 0; c < 4; ++c)
    for (int b = 0; b < p.power_bins(); ++b)
      CHECK(ref.at(c * p.power_bins() + b) ==
            doctest::Approx(0.25 * power_bin_mass(p, b, 2.0)).epsilon(1e-12));
}

TEST_CASE("binned_kernel_average: constant kernel is exact, symmetric") {
  ModelParams mp = unit_params(16.0);
  Partition p = make_partition(mp.domain, 2.0, 2, 1);
  KernelPair kp = make_synthetic_kernel(mp, 0.7, 0.0);  // q = 0.7 everywhere
  const BinnedMeasure qa = binned_kernel_average(p, mp, kp.limit_q);
  for (int a = 0; a < p.size(); ++a)
    for (int b = 0; b < p.size(); ++b) {
      CHECK(qa.at(a, b) == doctest::Approx(0.7).epsilon(1e-12));
      CHECK(qa.at(a, b) == qa.at(b, a));
    }
}

TEST_CASE("binned_kernel_average: finer sub-sampling refines a smooth kernel") {
  ModelParams mp = unit_params(16.0);
  Partition p = make_partition(mp.domain, 2.0, 1, 1);
  KernelPair kp = make_synthetic_kernel(mp, 1.0, 2.0);
  const double coarse = binned_kernel_average(p, mp, kp.limit_q, 2).at(0, 0);
  const double fine = binned_kernel_average(p, mp, kp.limit_q, 8).at(0, 0);
  const double finer = binned_kernel_average(p, mp, kp.limit_q, 16).at(0, 0);
  CHECK(std::abs(finer - fine) < std::abs(fine - coarse));
}

TEST_CASE("pair_product_measure: q pi (x) pi with a constant kernel") {
  ModelParams mp = unit_params(16.0);
  Partition p = make_partition(mp.domain, 2.0, 2, 1);
  KernelPair kp = make_synthetic_kernel(mp, 0.5, 0.0);
  const BinnedMeasure qa = binned_kernel_average(p, mp, kp.limit_q);
  BinnedMeasure pi = BinnedMeasure::on_bins(p);
  for (int b = 0; b < p.size(); ++b) pi.set(b, 0.25 * (b + 1));
  const BinnedMeasure m = pair_product_measure(qa, pi);
  for (int a = 0; a < p.size(); ++a)
    for (int b = 0; b < p.size(); ++b)
      CHECK(m.at(a, b) == doctest::Approx(0.5 * pi.at(a) * pi.at(b)).epsilon(1e-12));
  CHECK(m.total() == doctest::Approx(0.5 * pi.total() * pi.total()).epsilon(1e-10));
}

TEST_CASE("coarsen: nested partitions are consistent") {
  ModelParams mp = unit_params(500.0);
  Partition fine = make_partition(mp.domain, 2.0, 4, 2);
  Partition coarse = make_partition(mp.domain, 2.0, 2, 1);
  const auto pts = assign_powers(sample_ppp(mp, 23), mp, 24);
  SinrNetwork net;
  net.points = pts;
  // edges between a few nearby indices just to populate rank 2
  for (std::size_t i = 0; i + 1 < pts.size(); i += 7)
    net.edges.emplace_back(static_cast<int>(i), static_cast<int>(i + 1));

  SUBCASE("rank 1: coarsened fine measure equals direct coarse binning") {
    const BinnedMeasure u_fine = empirical_power_measure(net, fine, mp.lambda);
    const BinnedMeasure u_coarse = empirical_power_measure(net, coarse, mp.lambda);
    const BinnedMeasure down = coarsen(u_fine, fine, coarse);
    for (int b = 0; b < coarse.size(); ++b)
      CHECK(down.at(b) == doctest::Approx(u_coarse.at(b)).epsilon(1e-12));
  }
  SUBCASE("rank 2: totals and bin pairs agree") {
    const double a_l = mp.a_value();
    const BinnedMeasure u_fine = empirical_connectivity_measure(net, fine, mp.lambda, a_l);
    const BinnedMeasure u_coarse = empirical_connectivity_measure(net, coarse, mp.lambda, a_l);
    const BinnedMeasure down = coarsen(u_fine, fine, coarse);
    for (int a = 0; a < coarse.size(); ++a)
      for (int b = 0; b < coarse.size(); ++b)
        CHECK(down.at(a, b) == doctest::Approx(u_coarse.at(a, b)).epsilon(1e-12));
    CHECK(down.total() == doctest::Approx(u_coarse.total()).epsilon(1e-12));
  }
}
