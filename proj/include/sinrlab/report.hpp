#pragma once

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sinrlab/measure.hpp"

namespace sinrlab {

struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
  std::uint64_t hits = 0;
  double ess = 0.0;
  bool flagged = false;  // zero effective sample size or excluded cell
};

// Output record of an LDP/AEP/McMillan experiment. Every report carries the
// theory target next to the estimates; diagonal edge terms are excluded
// throughout (noted here so downstream readers see it in the payload).
struct RateReport {
  std::string experiment;
  std::vector<double> lambda_grid;
  std::vector<Estimate> estimates;
  double theory_target = 0.0;
  double slope = 0.0;
  double slope_ci = 0.0;  // half-width
  std::uint64_t seed_root = 0;
  bool diagonal_excluded = true;
  std::vector<std::pair<std::string, double>> extra;  // named scalars

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["experiment"] = experiment;
    j["lambda_grid"] = lambda_grid;
    j["theory_target"] = theory_target;
    j["slope"] = slope;
    j["slope_ci"] = slope_ci;
    j["seed_root"] = seed_root;
    j["diagonal_excluded"] = diagonal_excluded;
    auto arr = nlohmann::json::array();
    for (const auto& e : estimates) {
      arr.push_back({{"value", e.value},
                     {"stderr", e.stderr_},
                     {"hits", e.hits},
                     {"ess", e.ess},
                     {"flagged", e.flagged}});
    }
    j["estimates"] = arr;
    for (const auto& [k, v] : extra) j[k] = v;
    return j;
  }

  // CSV mirror: one row per grid cell, fixed header.
  void write_csv(std::ostream& os) const {
    os << "lambda,value,stderr,hits,ess,flagged,theory_target\n";
    os << std::setprecision(17);
    for (std::size_t i = 0; i < estimates.size(); ++i) {
      const double l = i < lambda_grid.size() ? lambda_grid[i] : 0.0;
      const auto& e = estimates[i];
      os << l << ',' << e.value << ',' << e.stderr_ << ',' << e.hits << ',' << e.ess << ','
         << (e.flagged ? 1 : 0) << ',' << theory_target << '\n';
    }
  }

  std::string csv_string() const {
    std::ostringstream os;
    write_csv(os);
    return os.str();
  }
};

// BinnedMeasure CSV: `bin_index[,bin_index_2],mass`.
inline void write_measure_csv(std::ostream& os, const BinnedMeasure& m) {
  os << std::setprecision(17);
  if (m.rank() == 1) {
    os << "bin_index,mass\n";
    for (int b = 0; b < m.bins(); ++b) os << b << ',' << m.at(b) << '\n';
  } else {
    os << "bin_index,bin_index_2,mass\n";
    for (int a = 0; a < m.bins(); ++a)
      for (int b = 0; b < m.bins(); ++b) os << a << ',' << b << ',' << m.at(a, b) << '\n';
  }
}

// Partition descriptor with explicit bin edges.
inline nlohmann::json partition_to_json(const Partition& p) {
  nlohmann::json j;
  j["id"] = p.id;
  j["dim"] = p.domain.dim;
  auto axes = nlohmann::json::array();
  for (int k = 0; k < p.domain.dim; ++k) {
    const auto& [lo, hi] = p.domain.bounds[k];
    auto edges = nlohmann::json::array();
    for (int i = 0; i <= p.domain_res[k]; ++i)
      edges.push_back(lo + (hi - lo) * i / p.domain_res[k]);
    axes.push_back(edges);
  }
  j["domain_bin_edges"] = axes;
  auto pedges = nlohmann::json::array();
  if (std::isinf(p.eta_cap)) {
    pedges.push_back(0.0);
    pedges.push_back("inf");
  } else {
    for (int i = 0; i <= p.power_res; ++i)
      pedges.push_back(p.eta_cap * i / p.power_res);
    pedges.push_back("inf");  // overflow bin
  }
  j["power_bin_edges"] = pedges;
  return j;
}

}  // namespace sinrlab
