#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "sinrlab/kernel.hpp"
#include "sinrlab/model.hpp"

namespace sinrlab {

// Finite partition of W = D x R_+ into rectangular domain cells crossed with
// power intervals. Powers above eta_cap land in an overflow bin so mass
// identities stay exact.
struct Partition {
  Domain domain;
  std::vector<int> domain_res;   // cells per axis
  int power_res = 1;             // regular power bins on (0, eta_cap]
  double eta_cap = std::numeric_limits<double>::infinity();
  std::string id;

  int domain_cells() const {
    int c = 1;
    for (int r : domain_res) c *= r;
    return c;
  }
  int power_bins() const {
    return std::isinf(eta_cap) ? power_res : power_res + 1;  // + overflow
  }
  int size() const { return domain_cells() * power_bins(); }

  int locate_domain_cell(const std::vector<double>& x) const {
    int cell = 0;
    for (int k = 0; k < domain.dim; ++k) {
      const auto& [lo, hi] = domain.bounds[k];
      if (x[k] < lo || x[k] > hi) throw ConfigError("partition: point outside domain cover");
      int i = static_cast<int>((x[k] - lo) / (hi - lo) * domain_res[k]);
      if (i == domain_res[k]) --i;  // right boundary
      cell = cell * domain_res[k] + i;
    }
    return cell;
  }

  int locate_power_bin(double eta) const {
    if (!(eta > 0.0)) throw ConfigError("partition: power must be positive");
    if (std::isinf(eta_cap)) return 0;
    if (eta > eta_cap) return power_res;  // overflow
    int i = static_cast<int>(eta / eta_cap * power_res);
    if (i == power_res) --i;
    return i;
  }

  int locate(const std::vector<double>& x, double eta) const {
    return locate_domain_cell(x) * power_bins() + locate_power_bin(eta);
  }

  int locate(const PoweredPoint& p) const { return locate(p.location, p.power); }
};

inline Partition make_partition(const Domain& dom, double eta_cap, int domain_res,
                                int power_res) {
  if (domain_res < 1 || power_res < 1) throw ConfigError("partition: resolutions must be >= 1");
  if (!(eta_cap > 0.0)) throw ConfigError("partition: eta_cap must be positive");
  if (std::isinf(eta_cap) && power_res != 1)
    throw ConfigError("partition: infinite eta_cap requires power_res = 1");
  Partition part;
  part.domain = dom;
  part.domain_res.assign(dom.dim, domain_res);
  part.power_res = power_res;
  part.eta_cap = eta_cap;
  part.id = "box" + std::to_string(dom.dim) + "_d" + std::to_string(domain_res) + "_p" +
            std::to_string(power_res) + "_cap" + std::to_string(eta_cap);
  return part;
}

// Nonnegative finite measure on the bins of a partition (rank 1, on W) or on
// ordered bin pairs (rank 2, on W x W; kept symmetric).
class BinnedMeasure {
 public:
  BinnedMeasure() = default;
  BinnedMeasure(std::string partition_id, int bins, int rank)
      : partition_id_(std::move(partition_id)),
        bins_(bins),
        rank_(rank),
        masses_(rank == 1 ? bins : bins * bins, 0.0) {}

  static BinnedMeasure on_bins(const Partition& p) {
    return BinnedMeasure(p.id, p.size(), 1);
  }
  static BinnedMeasure on_bin_pairs(const Partition& p) {
    return BinnedMeasure(p.id, p.size(), 2);
  }

  int rank() const { return rank_; }
  int bins() const { return bins_; }
  const std::string& partition_id() const { return partition_id_; }

  double at(int b) const { return masses_[b]; }
  double at(int a, int b) const { return masses_[a * bins_ + b]; }
  void set(int b, double v) { masses_[b] = v; total_cached_ = false; }
  void set(int a, int b, double v) {
    masses_[a * bins_ + b] = v;
    masses_[b * bins_ + a] = v;
    total_cached_ = false;
  }
  void add(int b, double v) { masses_[b] += v; total_cached_ = false; }
  // Adds v to both ordered pairs (a,b) and (b,a); on the diagonal both land
  // in the same cell.
  void add_symmetric(int a, int b, double v) {
    masses_[a * bins_ + b] += v;
    masses_[b * bins_ + a] += v;
    total_cached_ = false;
  }

  const std::vector<double>& raw() const { return masses_; }
  std::size_t cells() const { return masses_.size(); }
  double cell(std::size_t i) const { return masses_[i]; }
  void set_cell(std::size_t i, double v) { masses_[i] = v; total_cached_ = false; }

  double total() const {
    if (total_cached_) return total_;
    double s = 0.0, comp = 0.0;
    for (double m : masses_) {  // compensated summation
      double y = m - comp;
      double t = s + y;
      comp = (t - s) - y;
      s = t;
    }
    total_ = s;
    total_cached_ = true;
    return s;
  }

  // Exact totals from the construction path (integer counts / scale).
  void set_total_exact(double t) {
    total_ = t;
    total_cached_ = true;
  }

  bool same_partition(const BinnedMeasure& o) const {
    return partition_id_ == o.partition_id_ && bins_ == o.bins_ && rank_ == o.rank_;
  }

  BinnedMeasure& scale(double t) {
    for (double& m : masses_) m *= t;
    total_cached_ = false;
    return *this;
  }

 private:
  std::string partition_id_;
  int bins_ = 0;
  int rank_ = 1;
  std::vector<double> masses_;
  mutable double total_ = 0.0;
  mutable bool total_cached_ = false;
};

// <g, nu>: ordered-pair (or bin) sum of g against the measure.
inline double pairing(const std::vector<double>& g, const BinnedMeasure& nu) {
  double s = 0.0;
  for (std::size_t i = 0; i < nu.cells(); ++i) s += g[i] * nu.cell(i);
  return s;
}

inline double l1_distance(const BinnedMeasure& a, const BinnedMeasure& b) {
  if (!a.same_partition(b)) throw ConfigError("measure: partition mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.cells(); ++i) s += std::abs(a.cell(i) - b.cell(i));
  return s;
}

// U_1^lambda: mass of a bin is (#points in it)/lambda; total |I|/lambda exact.
inline BinnedMeasure empirical_power_measure(const SinrNetwork& net, const Partition& part,
                                             double lambda) {
  BinnedMeasure u1 = BinnedMeasure::on_bins(part);
  std::vector<std::uint64_t> counts(part.size(), 0);
  for (const auto& p : net.points) ++counts[part.locate(p)];
  for (int b = 0; b < part.size(); ++b) u1.set(b, counts[b] / lambda);
  u1.set_total_exact(static_cast<double>(net.points.size()) / lambda);
  return u1;
}

// U_2^lambda: each edge contributes 1/(lambda^2 a_lambda) to both ordered
// bin pairs of its endpoints; total 2|E|/(lambda^2 a_lambda) exact.
inline BinnedMeasure empirical_connectivity_measure(const SinrNetwork& net,
                                                    const Partition& part, double lambda,
                                                    double a_lambda) {
  BinnedMeasure u2 = BinnedMeasure::on_bin_pairs(part);
  const double w = 1.0 / (lambda * lambda * a_lambda);
  for (auto& [i, j] : net.edges) {
    const int a = part.locate(net.points[i]);
    const int b = part.locate(net.points[j]);
    u2.add_symmetric(a, b, w);
  }
  u2.set_total_exact(2.0 * net.edges.size() / (lambda * lambda * a_lambda));
  return u2;
}

// Integral of the exponential(c) mark law over a power bin.
inline double power_bin_mass(const Partition& part, int bin, double c) {
  if (std::isinf(part.eta_cap)) return 1.0;
  const double w = part.eta_cap / part.power_res;
  if (bin == part.power_res) return std::exp(-c * part.eta_cap);  // overflow
  return std::exp(-c * bin * w) - std::exp(-c * (bin + 1) * w);
}

// Reference measure mu (x) K binned: intensity mass of each domain cell times
// the exponential mark-law mass of each power interval. `sub` midpoint nodes
// per axis per cell for non-uniform intensities.
inline BinnedMeasure reference_power_measure(const Partition& part, const ModelParams& params,
                                             int sub = 8) {
  BinnedMeasure ref = BinnedMeasure::on_bins(part);
  const auto& dom = part.domain;
  const int cells = part.domain_cells();
  std::vector<double> cell_mass(cells, 0.0);
  // midpoint rule per cell
  std::vector<int> res = part.domain_res;
  std::vector<int> idx(dom.dim, 0);
  for (;;) {
    int cell = 0;
    for (int k = 0; k < dom.dim; ++k) cell = cell * res[k] + idx[k];
    double vol = 1.0;
    for (int k = 0; k < dom.dim; ++k)
      vol *= (dom.bounds[k].second - dom.bounds[k].first) / res[k];
    double mass = 0.0;
    std::vector<int> sidx(dom.dim, 0);
    for (;;) {
      std::vector<double> z(dom.dim);
      for (int k = 0; k < dom.dim; ++k) {
        const auto& [lo, hi] = dom.bounds[k];
        const double w = (hi - lo) / res[k];
        z[k] = lo + w * idx[k] + w * (sidx[k] + 0.5) / sub;
      }
      mass += params.intensity.density(z);
      int k = 0;
      while (k < dom.dim && ++sidx[k] == sub) sidx[k++] = 0;
      if (k == dom.dim) break;
    }
    cell_mass[cell] = mass * vol / std::pow(static_cast<double>(sub), dom.dim);
    int k = 0;
    while (k < dom.dim && ++idx[k] == res[k]) idx[k++] = 0;
    if (k == dom.dim) break;
  }
  for (int c = 0; c < cells; ++c)
    for (int pb = 0; pb < part.power_bins(); ++pb)
      ref.set(c * part.power_bins() + pb,
              cell_mass[c] * power_bin_mass(part, pb, params.power_rate));
  return ref;
}

// Bin-averaged kernel values on ordered bin pairs. The kernel is sampled at
// `sub` midpoint nodes per axis inside each domain cell and the power
// dependence is evaluated at bin-representative marks.
inline BinnedMeasure binned_kernel_average(const Partition& part, const ModelParams& params,
                                           const Kernel& limit_q, int sub = 4) {
  BinnedMeasure m = BinnedMeasure::on_bin_pairs(part);
  const auto& dom = part.domain;
  const int pb = part.power_bins();
  const int cells = part.domain_cells();

  // Midpoint nodes of each domain cell.
  std::vector<std::vector<std::vector<double>>> nodes(cells);
  std::vector<int> idx(dom.dim, 0);
  for (;;) {
    int cell = 0;
    for (int k = 0; k < dom.dim; ++k) cell = cell * part.domain_res[k] + idx[k];
    std::vector<int> sidx(dom.dim, 0);
    for (;;) {
      std::vector<double> z(dom.dim);
      for (int k = 0; k < dom.dim; ++k) {
        const auto& [lo, hi] = dom.bounds[k];
        const double w = (hi - lo) / part.domain_res[k];
        z[k] = lo + w * idx[k] + w * (sidx[k] + 0.5) / sub;
      }
      nodes[cell].push_back(std::move(z));
      int k = 0;
      while (k < dom.dim && ++sidx[k] == sub) sidx[k++] = 0;
      if (k == dom.dim) break;
    }
    int k = 0;
    while (k < dom.dim && ++idx[k] == part.domain_res[k]) idx[k++] = 0;
    if (k == dom.dim) break;
  }

  auto rep_power = [&](int bin) {
    if (std::isinf(part.eta_cap)) return 1.0 / params.power_rate;
    const double w = part.eta_cap / part.power_res;
    if (bin == part.power_res) return part.eta_cap + 1.0 / params.power_rate;
    return (bin + 0.5) * w;
  };

  for (int ca = 0; ca < cells; ++ca) {
    for (int cb = 0; cb < cells; ++cb) {
      // Average q over node pairs of the two cells.
      for (int pa = 0; pa < pb; ++pa) {
        for (int qb = 0; qb < pb; ++qb) {
          const int a = ca * pb + pa;
          const int b = cb * pb + qb;
          if (b < a) continue;
          PoweredPoint xa{{}, rep_power(pa)};
          PoweredPoint xb{{}, rep_power(qb)};
          double qsum = 0.0;
          std::size_t cnt = 0;
          for (const auto& za : nodes[ca]) {
            for (const auto& zbn : nodes[cb]) {
              xa.location = za;
              xb.location = zbn;
              qsum += limit_q(xa, xb);
              ++cnt;
            }
          }
          const double qavg = cnt ? qsum / cnt : 0.0;
          m.set(a, b, qavg);
        }
      }
    }
  }
  return m;
}

// q pi (x) pi on ordered bin pairs from a bin-averaged kernel and a rank-1
// measure pi.
inline BinnedMeasure pair_product_measure(const BinnedMeasure& q_avg, const BinnedMeasure& pi) {
  if (q_avg.partition_id() != pi.partition_id())
    throw ConfigError("pair_product_measure: partition mismatch");
  BinnedMeasure m(pi.partition_id(), pi.bins(), 2);
  for (int a = 0; a < pi.bins(); ++a)
    for (int b = a; b < pi.bins(); ++b)
      m.set(a, b, q_avg.at(a, b) * pi.at(a) * pi.at(b));
  return m;
}

// Reference pair measure q (mu x K) (x) (mu x K) binned on ordered bin pairs.
inline BinnedMeasure reference_pair_measure(const Partition& part, const ModelParams& params,
                                            const Kernel& limit_q, int sub = 4) {
  return pair_product_measure(binned_kernel_average(part, params, limit_q, sub),
                              reference_power_measure(part, params, sub));
}

// Coarsens a measure onto a nested partition by summing child bins.
inline BinnedMeasure coarsen(const BinnedMeasure& fine, const Partition& fine_part,
                             const Partition& coarse_part) {
  // Map each fine bin to its coarse bin by a representative point.
  const int fpb = fine_part.power_bins();
  std::vector<int> map(fine_part.size());
  std::vector<int> idx(fine_part.domain.dim, 0);
  for (;;) {
    int cell = 0;
    std::vector<double> mid(fine_part.domain.dim);
    for (int k = 0; k < fine_part.domain.dim; ++k) {
      const auto& [lo, hi] = fine_part.domain.bounds[k];
      const double w = (hi - lo) / fine_part.domain_res[k];
      mid[k] = lo + w * (idx[k] + 0.5);
      cell = cell * fine_part.domain_res[k] + idx[k];
    }
    for (int pbn = 0; pbn < fpb; ++pbn) {
      double eta;
      if (std::isinf(fine_part.eta_cap)) {
        eta = 1.0;
      } else if (pbn == fine_part.power_res) {
        eta = fine_part.eta_cap * 2.0 + 1.0;
      } else {
        eta = (pbn + 0.5) * fine_part.eta_cap / fine_part.power_res;
      }
      map[cell * fpb + pbn] = coarse_part.locate(mid, eta);
    }
    int k = 0;
    while (k < fine_part.domain.dim && ++idx[k] == fine_part.domain_res[k]) idx[k++] = 0;
    if (k == fine_part.domain.dim) break;
  }
  if (fine.rank() == 1) {
    BinnedMeasure out = BinnedMeasure::on_bins(coarse_part);
    for (int b = 0; b < fine_part.size(); ++b) out.add(map[b], fine.at(b));
    return out;
  }
  BinnedMeasure out = BinnedMeasure::on_bin_pairs(coarse_part);
  const int cb = coarse_part.size();
  for (int a = 0; a < fine_part.size(); ++a)
    for (int b = 0; b < fine_part.size(); ++b)
      out.set_cell(static_cast<std::size_t>(map[a]) * cb + map[b],
                   out.at(map[a], map[b]) + fine.at(a, b));
  return out;
}

}  // namespace sinrlab
