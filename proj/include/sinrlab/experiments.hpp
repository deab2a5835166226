#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sinrlab/config.hpp"
#include "sinrlab/inference.hpp"
#include "sinrlab/kernel.hpp"
#include "sinrlab/measure.hpp"
#include "sinrlab/model.hpp"
#include "sinrlab/oracle.hpp"
#include "sinrlab/report.hpp"
#include "sinrlab/rng.hpp"

namespace sinrlab {

inline constexpr const char* kVersion = "0.1.0";

inline std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

struct RunResult {
  std::vector<std::string> outputs;  // files written, relative to out dir
  nlohmann::json report;
};

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text,
                       std::vector<std::string>& outputs) {
  std::ofstream os(path);
  if (!os) throw ConfigError("run: cannot write " + path.string());
  os << text;
  outputs.push_back(path.filename().string());
}

inline SinrNetwork generate_network(const ExperimentConfig& cfg, double lambda) {
  const ModelParams p = cfg.make_params(lambda);
  const std::uint64_t s_pts = derive_seed(cfg.seed_root, "ppp");
  const std::uint64_t s_pow = derive_seed(cfg.seed_root, "powers");
  const auto locs = sample_ppp(p, s_pts);
  const PoweredPointSet pts = assign_powers(locs, p, s_pow);
  const std::string gen = cfg.file.get_or("run.generator", "sinr");
  if (gen == "sinr") return build_network(pts, p);
  if (gen == "q-driven")
    return q_driven_network(pts, p, cfg.make_connection_kernel(p),
                            derive_seed(cfg.seed_root, "edges"));
  throw ConfigError("config: run.generator must be sinr|q-driven");
}

inline nlohmann::json run_generate(const ExperimentConfig& cfg,
                                   const std::filesystem::path& out,
                                   std::vector<std::string>& outputs) {
  const double lambda = cfg.lambda_grid.back();
  const SinrNetwork net = generate_network(cfg, lambda);
  std::ostringstream os;
  write_network(os, net, cfg.make_params(lambda));
  write_text(out / "network.txt", os.str(), outputs);
  nlohmann::json j;
  j["experiment"] = "generate";
  j["lambda"] = lambda;
  j["points"] = net.points.size();
  j["edges"] = net.edges.size();
  return j;
}

inline nlohmann::json run_measures(const ExperimentConfig& cfg,
                                   const std::filesystem::path& out,
                                   std::vector<std::string>& outputs) {
  const double lambda = cfg.lambda_grid.back();
  const ModelParams p = cfg.make_params(lambda);
  const SinrNetwork net = generate_network(cfg, lambda);
  const Partition part = cfg.make_partition();
  const BinnedMeasure u1 = empirical_power_measure(net, part, lambda);
  const BinnedMeasure u2 = empirical_connectivity_measure(net, part, lambda, p.a_value());
  {
    std::ostringstream os;
    write_measure_csv(os, u1);
    write_text(out / "u1.csv", os.str(), outputs);
  }
  {
    std::ostringstream os;
    write_measure_csv(os, u2);
    write_text(out / "u2.csv", os.str(), outputs);
  }
  write_text(out / "partition.json", partition_to_json(part).dump(2), outputs);
  nlohmann::json j;
  j["experiment"] = "measures";
  j["lambda"] = lambda;
  j["u1_total"] = u1.total();
  j["u2_total"] = u2.total();
  j["points"] = net.points.size();
  j["edges"] = net.edges.size();
  return j;
}

inline nlohmann::json run_scgf(const ExperimentConfig& cfg, const std::filesystem::path& out,
                               std::vector<std::string>& outputs) {
  const Partition part = cfg.make_partition();
  const std::string speed_s = cfg.file.get_or("scgf.speed", "quad");
  const ScgfSpeed speed = speed_s == "lin" ? ScgfSpeed::kLinear : ScgfSpeed::kQuadratic;
  RateReport rep;
  rep.experiment = "scgf";
  rep.lambda_grid = cfg.lambda_grid;
  rep.seed_root = cfg.seed_root;
  for (std::size_t li = 0; li < cfg.lambda_grid.size(); ++li) {
    const ModelParams p = cfg.make_params(cfg.lambda_grid[li]);
    const Kernel conn = cfg.make_connection_kernel(p);
    const PoweredPointSet pts = quenched_points(p, derive_seed(cfg.seed_root, "scgf-pts", li));
    const TiltFunction g = TiltFunction::constant(part.size(), cfg.g0);
    const ScgfEstimate est = scgf_estimate(g, pts, p, conn, part, speed, cfg.trials,
                                           derive_seed(cfg.seed_root, "scgf-run", li));
    rep.estimates.push_back({est.value, est.stderr_, 0, 0.0, false});
    // theory target from the limit kernel and the conditioned pi
    const SinrNetwork tmp{pts, {}, p.lambda, p.a_value()};
    const BinnedMeasure pi = empirical_power_measure(tmp, part, p.lambda);
    const BinnedMeasure q_pi_pi = pair_product_measure(
        binned_kernel_average(part, p, cfg.make_limit_kernel(p)), pi);
    rep.theory_target = speed == ScgfSpeed::kLinear
                            ? 0.5 * cfg.g0 * q_pi_pi.total()
                            : -0.5 * (1.0 - std::exp(cfg.g0)) * q_pi_pi.total();
  }
  write_text(out / "report.csv", rep.csv_string(), outputs);
  write_text(out / "report.json", rep.to_json().dump(2), outputs);
  return rep.to_json();
}

inline nlohmann::json run_ldp_decay(const ExperimentConfig& cfg,
                                    const std::filesystem::path& out,
                                    std::vector<std::string>& outputs) {
  const Partition part = cfg.make_partition();
  const ModelParams p0 = cfg.make_params(cfg.lambda_grid.back());
  const BinnedMeasure m =
      reference_pair_measure(part, p0, cfg.make_limit_kernel(p0));
  BinnedMeasure nu = m;
  nu.scale(cfg.event_center_scale);
  const double radius = cfg.event_radius_rel * m.total();
  const EventSpec event = cfg.event_kind == EventKind::kTvBall
                              ? EventSpec::tv_ball(nu, radius)
                              : EventSpec::halfspace(
                                    nu, TiltFunction::constant(part.size(), 1.0), radius);
  RateReport rep = decay_rate_estimate(
      event, m, cfg.lambda_grid, p0, [&](double l) { return cfg.make_params(l); },
      [&](const ModelParams& p) { return cfg.make_connection_kernel(p); }, part, cfg.trials,
      cfg.seed_root);
  rep.extra.emplace_back("slope_over_target",
                         rep.theory_target > 0.0 ? rep.slope / rep.theory_target : 0.0);
  write_text(out / "report.csv", rep.csv_string(), outputs);
  write_text(out / "report.json", rep.to_json().dump(2), outputs);
  return rep.to_json();
}

inline nlohmann::json run_aep(const ExperimentConfig& cfg, const std::filesystem::path& out,
                              std::vector<std::string>& outputs) {
  const Partition part = cfg.make_partition();
  RateReport rep;
  rep.experiment = "aep";
  rep.lambda_grid = cfg.lambda_grid;
  rep.seed_root = cfg.seed_root;
  {
    const ModelParams p0 = cfg.make_params(cfg.lambda_grid.back());
    rep.theory_target =
        reference_pair_measure(part, p0, cfg.make_limit_kernel(p0)).total();
  }
  for (std::size_t li = 0; li < cfg.lambda_grid.size(); ++li) {
    const ModelParams p = cfg.make_params(cfg.lambda_grid[li]);
    const Kernel conn = cfg.make_connection_kernel(p);
    std::vector<double> devs;
    for (int s = 0; s < cfg.aep_seeds; ++s) {
      PoweredPointSet pts;
      if (cfg.quenched) {
        pts = quenched_points(p, derive_seed(cfg.seed_root, "aep-pts", li, s));
      } else {
        const auto locs = sample_ppp(p, derive_seed(cfg.seed_root, "aep-ppp", li, s));
        pts = assign_powers(locs, p, derive_seed(cfg.seed_root, "aep-pow", li, s));
      }
      const SinrNetwork net =
          q_driven_network(pts, p, conn, derive_seed(cfg.seed_root, "aep-edges", li, s));
      devs.push_back(std::abs(aep_statistic(net, p, conn) - rep.theory_target));
    }
    std::sort(devs.begin(), devs.end());
    const double median = devs.size() % 2 == 1
                              ? devs[devs.size() / 2]
                              : 0.5 * (devs[devs.size() / 2 - 1] + devs[devs.size() / 2]);
    rep.estimates.push_back({median, 0.0, static_cast<std::uint64_t>(devs.size()), 0.0, false});
  }
  write_text(out / "report.csv", rep.csv_string(), outputs);
  write_text(out / "report.json", rep.to_json().dump(2), outputs);
  return rep.to_json();
}

inline nlohmann::json run_mcmillan(const ExperimentConfig& cfg,
                                   const std::filesystem::path& out,
                                   std::vector<std::string>& outputs) {
  const double lambda = cfg.lambda_grid.back();
  const ModelParams p = cfg.make_params(lambda);
  const Partition part = cfg.make_partition();
  const Kernel conn = cfg.make_connection_kernel(p);
  PoweredPointSet pts = quenched_points(p, derive_seed(cfg.seed_root, "mcm-pts"));
  const int want = cfg.file.get_int_or("run.points", static_cast<int>(pts.size()));
  while (static_cast<int>(pts.size()) > want) pts.pop_back();
  const EnumInstance inst = EnumInstance::from_kernel(pts, conn, part);

  const SinrNetwork tmp{pts, {}, lambda, p.a_value()};
  const BinnedMeasure pi = empirical_power_measure(tmp, part, lambda);
  const BinnedMeasure q_pi_pi =
      pair_product_measure(binned_kernel_average(part, p, cfg.make_limit_kernel(p)), pi);
  BinnedMeasure nu = q_pi_pi;
  nu.scale(cfg.event_center_scale);
  const double radius = cfg.event_radius_rel * q_pi_pi.total();
  const EventSpec event = EventSpec::tv_ball(nu, radius);
  const double lambda_pi_pi_mass = lambda * pi.total() * pi.total();
  const CardinalityResult res = exact_cardinality(event, inst, lambda, p.a_value(), q_pi_pi,
                                                  cfg.ref2, lambda_pi_pi_mass);
  nlohmann::json j;
  j["experiment"] = "mcmillan";
  j["instance_hash"] = fnv1a_hex(cfg.raw_text + "|n=" + std::to_string(pts.size()));
  j["lambda"] = lambda;
  j["pairs"] = inst.pair_count();
  j["count"] = res.count;
  j["bound"] = res.bound;
  j["h_nu"] = res.h_nu;
  j["log_count_rate"] = res.log_count_rate;
  j["abs_gap"] = std::abs(res.log_count_rate - res.h_nu);
  j["epsilon"] = cfg.mcmillan_eps;
  j["within_epsilon"] = std::abs(res.log_count_rate - res.h_nu) <= cfg.mcmillan_eps;
  j["exact_event_probability"] = exact_event_probability(event, inst, lambda, p.a_value());
  std::ostringstream csv;
  csv << "count,bound,h_nu,log_count_rate,abs_gap,epsilon\n"
      << res.count << ',' << res.bound << ',' << res.h_nu << ',' << res.log_count_rate << ','
      << j["abs_gap"].get<double>() << ',' << cfg.mcmillan_eps << '\n';
  write_text(out / "report.csv", csv.str(), outputs);
  write_text(out / "report.json", j.dump(2), outputs);
  return j;
}

inline nlohmann::json run_limit_check(const ExperimentConfig& cfg,
                                      const std::filesystem::path& out,
                                      std::vector<std::string>& outputs) {
  const Domain dom = cfg.make_domain();
  // Fixed probe pair: mid-domain, separated along the first axis.
  const double sep = cfg.file.get_double_or("limitcheck.separation",
                                            0.25 * (dom.bounds[0].second - dom.bounds[0].first));
  PoweredPoint x, y;
  for (int k = 0; k < dom.dim; ++k) {
    const double mid = 0.5 * (dom.bounds[k].first + dom.bounds[k].second);
    x.location.push_back(mid);
    y.location.push_back(k == 0 ? mid + sep / 2 : mid);
  }
  x.location[0] -= sep / 2;
  x.power = y.power = 1.0 / cfg.power_rate;
  auto q_at = [&](double lambda) {
    const ModelParams p = cfg.make_params(lambda);
    return cfg.make_connection_kernel(p)(x, y);
  };
  auto a_of = [&](double lambda) { return std::pow(lambda, -cfg.a_exp); };
  const LimitCheckReport rep = limit_kernel_check(q_at, cfg.lambda_grid, a_of);
  nlohmann::json j;
  j["experiment"] = "limit-check";
  j["lambda_grid"] = rep.lambdas;
  j["scaled_values"] = rep.scaled_values;
  j["rel_changes"] = rep.rel_changes;
  j["limit"] = rep.limit;
  j["converged"] = rep.converged;
  std::ostringstream csv;
  csv << "lambda,scaled_value\n";
  csv.precision(17);
  for (std::size_t i = 0; i < rep.lambdas.size(); ++i)
    csv << rep.lambdas[i] << ',' << rep.scaled_values[i] << '\n';
  write_text(out / "report.csv", csv.str(), outputs);
  write_text(out / "report.json", j.dump(2), outputs);
  return j;
}

}  // namespace detail

// Runs the configured experiment into `out_dir`, writing reports and a
// manifest sufficient to reproduce the run byte-for-byte.
inline RunResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
  namespace fs = std::filesystem;
  const fs::path out(out_dir);
  fs::create_directories(out);
  RunResult res;
  nlohmann::json manifest;
  manifest["version"] = kVersion;
  manifest["experiment"] = experiment_kind_name(cfg.kind);
  manifest["seed_root"] = cfg.seed_root;
  manifest["config_hash"] = fnv1a_hex(cfg.raw_text);
  manifest["config_text"] = cfg.raw_text;
  try {
    switch (cfg.kind) {
      case ExperimentKind::kGenerate:
        res.report = detail::run_generate(cfg, out, res.outputs);
        break;
      case ExperimentKind::kMeasures:
        res.report = detail::run_measures(cfg, out, res.outputs);
        break;
      case ExperimentKind::kScgf:
        res.report = detail::run_scgf(cfg, out, res.outputs);
        break;
      case ExperimentKind::kLdpDecay:
        res.report = detail::run_ldp_decay(cfg, out, res.outputs);
        break;
      case ExperimentKind::kAep:
        res.report = detail::run_aep(cfg, out, res.outputs);
        break;
      case ExperimentKind::kMcmillan:
        res.report = detail::run_mcmillan(cfg, out, res.outputs);
        break;
      case ExperimentKind::kLimitCheck:
        res.report = detail::run_limit_check(cfg, out, res.outputs);
        break;
    }
    manifest["complete"] = true;
  } catch (...) {
    manifest["complete"] = false;
    manifest["outputs"] = res.outputs;
    std::ofstream(out / "manifest.json") << manifest.dump(2) << '\n';
    throw;
  }
  manifest["outputs"] = res.outputs;
  std::ofstream(out / "manifest.json") << manifest.dump(2) << '\n';
  return res;
}

// The manifest alone reproduces a run: it embeds the full config text and
// seed root.
inline RunResult run_from_manifest(const std::string& manifest_path, const std::string& out_dir) {
  std::ifstream is(manifest_path);
  if (!is) throw ConfigError("manifest: cannot open " + manifest_path);
  nlohmann::json m = nlohmann::json::parse(is);
  ExperimentConfig cfg = ExperimentConfig::load(m.at("config_text").get<std::string>());
  cfg.seed_root = m.at("seed_root").get<std::uint64_t>();
  return run_experiment(cfg, out_dir);
}

}  // namespace sinrlab
