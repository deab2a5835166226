#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sinrlab/entropy.hpp"
#include "sinrlab/event.hpp"
#include "sinrlab/kernel.hpp"
#include "sinrlab/measure.hpp"
#include "sinrlab/model.hpp"

namespace sinrlab {

// Flat-section key-value config file:
//   [section]
//   key = value        # comment
// Keys are addressed as "section.key".
class ConfigFile {
 public:
  static ConfigFile parse(std::istream& is) {
    ConfigFile cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      const auto last = line.find_last_not_of(" \t\r");
      line = line.substr(first, last - first + 1);
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ConfigError("config line " + std::to_string(lineno) + ": unterminated section");
        section = line.substr(1, line.size() - 2);
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
      std::string key = line.substr(0, eq);
      std::string val = line.substr(eq + 1);
      auto trim = [](std::string& s) {
        const auto a = s.find_first_not_of(" \t");
        const auto b = s.find_last_not_of(" \t");
        s = a == std::string::npos ? "" : s.substr(a, b - a + 1);
      };
      trim(key);
      trim(val);
      cfg.values_[section.empty() ? key : section + "." + key] = val;
    }
    return cfg;
  }

  static ConfigFile parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path);
    return parse(is);
  }

  static ConfigFile parse_string(const std::string& text) {
    std::istringstream is(text);
    return parse(is);
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("config: missing field `" + key + "`");
    return it->second;
  }

  std::string get_or(const std::string& key, const std::string& def) const {
    auto it = values_.find(key);
    return it == values_.end() ? def : it->second;
  }

  double get_double(const std::string& key) const { return to_double(key, get(key)); }
  double get_double_or(const std::string& key, double def) const {
    return has(key) ? get_double(key) : def;
  }
  int get_int(const std::string& key) const { return static_cast<int>(get_double(key)); }
  int get_int_or(const std::string& key, int def) const {
    return has(key) ? get_int(key) : def;
  }
  std::uint64_t get_u64_or(const std::string& key, std::uint64_t def) const {
    if (!has(key)) return def;
    return std::stoull(get(key));
  }

  std::vector<double> get_doubles(const std::string& key) const {
    std::istringstream is(get(key));
    std::vector<double> out;
    std::string tok;
    while (is >> tok) out.push_back(to_double(key, tok));
    if (out.empty()) throw ConfigError("config: field `" + key + "` is empty");
    return out;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  static double to_double(const std::string& key, const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config: field `" + key + "` is not a number: " + s);
    }
  }

  std::map<std::string, std::string> values_;
};

enum class ExperimentKind {
  kGenerate,
  kMeasures,
  kScgf,
  kLdpDecay,
  kAep,
  kMcmillan,
  kLimitCheck,
};

inline ExperimentKind parse_experiment_kind(const std::string& s) {
  if (s == "generate") return ExperimentKind::kGenerate;
  if (s == "measures") return ExperimentKind::kMeasures;
  if (s == "scgf") return ExperimentKind::kScgf;
  if (s == "ldp-decay") return ExperimentKind::kLdpDecay;
  if (s == "aep") return ExperimentKind::kAep;
  if (s == "mcmillan") return ExperimentKind::kMcmillan;
  if (s == "limit-check") return ExperimentKind::kLimitCheck;
  throw ConfigError("config: unknown experiment kind `" + s + "`");
}

inline std::string experiment_kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::kGenerate: return "generate";
    case ExperimentKind::kMeasures: return "measures";
    case ExperimentKind::kScgf: return "scgf";
    case ExperimentKind::kLdpDecay: return "ldp-decay";
    case ExperimentKind::kAep: return "aep";
    case ExperimentKind::kMcmillan: return "mcmillan";
    case ExperimentKind::kLimitCheck: return "limit-check";
  }
  return "?";
}

// Parsed and validated experiment configuration; factory for model objects.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kGenerate;
  ConfigFile file;
  std::string raw_text;

  // model block
  int dim = 1;
  std::vector<std::pair<double, double>> bounds;
  BoundaryMode boundary = BoundaryMode::kHard;
  double intensity_mass = 1.0;
  double power_rate = 1.0;
  double pathloss = 2.0;
  double tau0 = 1.0;
  double gamma0 = 1.0;
  double noise = 0.0;
  double a_exp = 0.5;
  InterferenceMode interference = InterferenceMode::kExcludeSignal;

  // kernel block
  bool kernel_synthetic = true;
  double kappa = 1.0;
  double theta = 0.0;
  double t0 = 1.0;         // integral-mode tau*gamma base
  double scale_exp = 2.0;  // integral-mode tau*gamma ~ t0 / lambda^scale_exp

  // quadrature block
  QuadratureSpec quad;

  // partition block
  int domain_res = 1;
  int power_res = 1;
  double eta_cap = std::numeric_limits<double>::infinity();

  // entropy block
  EntropyRef2 ref2 = EntropyRef2::kQPiPi;

  // grid / run
  std::vector<double> lambda_grid;
  int trials = 1000;
  std::uint64_t seed_root = 1;
  bool quenched = true;
  int aep_seeds = 64;

  // event block (ldp-decay / mcmillan)
  EventKind event_kind = EventKind::kTvBall;
  double event_center_scale = 2.0;  // nu = scale * (q pi (x) pi)
  double event_radius_rel = 0.05;   // radius = rel * ||q pi (x) pi||
  double mcmillan_eps = 0.05;

  // scgf block
  double g0 = 0.5;

  static ExperimentConfig load(const std::string& text) {
    ExperimentConfig c;
    c.raw_text = text;
    c.file = ConfigFile::parse_string(text);
    const ConfigFile& f = c.file;
    c.kind = parse_experiment_kind(f.get("experiment.kind"));

    c.dim = f.get_int_or("model.dim", 1);
    if (c.dim < 1) throw ConfigError("config: model.dim must be >= 1");
    std::vector<double> b =
        f.has("model.bounds") ? f.get_doubles("model.bounds") : std::vector<double>{0.0, 1.0};
    if (b.size() == 2 && c.dim > 1) {
      for (int k = 1; k < c.dim; ++k) {
        b.push_back(b[0]);
        b.push_back(b[1]);
      }
    }
    if (b.size() != static_cast<std::size_t>(2 * c.dim))
      throw ConfigError("config: model.bounds needs 2 values per axis");
    for (int k = 0; k < c.dim; ++k) c.bounds.emplace_back(b[2 * k], b[2 * k + 1]);
    const std::string bm = f.get_or("model.boundary", "hard");
    if (bm == "hard") c.boundary = BoundaryMode::kHard;
    else if (bm == "toroidal") c.boundary = BoundaryMode::kToroidal;
    else throw ConfigError("config: model.boundary must be hard|toroidal");
    c.intensity_mass = f.get_double_or("model.intensity_mass", 1.0);
    c.power_rate = f.get_double_or("model.c", 1.0);
    c.pathloss = f.get_double_or("model.ell", 2.0);
    c.tau0 = f.get_double_or("model.tau0", 1.0);
    c.gamma0 = f.get_double_or("model.gamma0", 1.0);
    c.noise = f.get_double_or("model.noise", 0.0);
    c.a_exp = f.get_double_or("model.a_exp", 0.5);
    if (!(c.a_exp > 0.0) || !(c.a_exp < 1.0))
      throw ConfigError("config: model.a_exp must lie in (0,1) (super-critical regime)");
    const std::string im = f.get_or("model.interference", "exclude-signal");
    if (im == "exclude-signal") c.interference = InterferenceMode::kExcludeSignal;
    else if (im == "literal") c.interference = InterferenceMode::kLiteral;
    else throw ConfigError("config: model.interference must be exclude-signal|literal");

    const std::string km = f.get_or("kernel.mode", "synthetic");
    if (km == "synthetic") c.kernel_synthetic = true;
    else if (km == "integral") c.kernel_synthetic = false;
    else throw ConfigError("config: kernel.mode must be synthetic|integral");
    c.kappa = f.get_double_or("kernel.kappa", 1.0);
    c.theta = f.get_double_or("kernel.theta", 0.0);
    c.t0 = f.get_double_or("kernel.t0", 1.0);
    c.scale_exp = f.get_double_or("kernel.scale_exp", 2.0);

    const std::string qs = f.get_or("quad.scheme", c.dim >= 3 ? "monte-carlo" : "midpoint-grid");
    if (qs == "midpoint-grid") c.quad.scheme = QuadScheme::kMidpointGrid;
    else if (qs == "monte-carlo") c.quad.scheme = QuadScheme::kMonteCarlo;
    else throw ConfigError("config: quad.scheme must be midpoint-grid|monte-carlo");
    c.quad.resolution =
        f.get_int_or("quad.resolution", c.quad.scheme == QuadScheme::kMidpointGrid ? 256 : 100000);
    c.quad.seed = f.get_u64_or("quad.seed", 0);

    c.domain_res = f.get_int_or("partition.domain_res", 1);
    c.power_res = f.get_int_or("partition.power_res", 1);
    c.eta_cap = f.get_double_or("partition.eta_cap",
                                std::numeric_limits<double>::infinity());

    const std::string r2 = f.get_or("entropy.ref2", "q_pi_pi");
    if (r2 == "q_pi_pi") c.ref2 = EntropyRef2::kQPiPi;
    else if (r2 == "lambda_pi_pi") c.ref2 = EntropyRef2::kLambdaPiPi;
    else throw ConfigError("config: entropy.ref2 must be q_pi_pi|lambda_pi_pi");

    c.lambda_grid = f.get_doubles("grid.lambdas");
    for (std::size_t i = 1; i < c.lambda_grid.size(); ++i)
      if (!(c.lambda_grid[i] > c.lambda_grid[i - 1]))
        throw ConfigError("config: grid.lambdas must be strictly increasing");
    c.trials = f.get_int_or("run.trials", 1000);
    c.seed_root = f.get_u64_or("run.seed_root", 1);
    c.quenched = f.get_or("run.conditioning", "quenched") == "quenched";
    c.aep_seeds = f.get_int_or("run.aep_seeds", 64);

    const std::string ek = f.get_or("event.kind", "tv_ball");
    if (ek == "tv_ball") c.event_kind = EventKind::kTvBall;
    else if (ek == "halfspace") c.event_kind = EventKind::kHalfspace;
    else throw ConfigError("config: event.kind must be tv_ball|halfspace");
    c.event_center_scale = f.get_double_or("event.center_scale", 2.0);
    c.event_radius_rel = f.get_double_or("event.radius_rel", 0.05);
    c.mcmillan_eps = f.get_double_or("event.mcmillan_eps", 0.05);
    c.g0 = f.get_double_or("scgf.g0", 0.5);
    return c;
  }

  static ExperimentConfig load_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return load(ss.str());
  }

  Domain make_domain() const { return Domain::box(bounds, boundary); }

  ModelParams make_params(double lambda) const {
    ModelParams p;
    p.domain = make_domain();
    p.lambda = lambda;
    p.intensity = Intensity::uniform(p.domain, intensity_mass);
    p.power_rate = power_rate;
    p.pathloss_exponent = pathloss;
    const double t = tau0;
    p.tau = [t](double) { return t; };
    if (kernel_synthetic) {
      const double g = gamma0;
      p.gamma = [g](double) { return g; };
    } else {
      // tau*gamma scaled down with lambda so the limit can exist; checked
      // empirically by limit-check, never assumed.
      const double g = t0 / (t * std::pow(lambda, scale_exp));
      p.gamma = [g](double) { return g; };
    }
    p.noise = noise;
    const double ae = a_exp;
    p.a_lambda = [ae](double l) { return std::pow(l, -ae); };
    p.interference_mode = interference;
    p.validate();
    return p;
  }

  Kernel make_connection_kernel(const ModelParams& p) const {
    if (kernel_synthetic) return make_synthetic_kernel(p, kappa, theta).connection;
    return make_integral_kernel(p, quad);
  }

  Kernel make_limit_kernel(const ModelParams& p) const {
    if (kernel_synthetic) return make_synthetic_kernel(p, kappa, theta).limit_q;
    // Integral mode has no closed-form limit; use the scaled Q at this lambda.
    const Kernel conn = make_integral_kernel(p, quad);
    const double a_l = p.a_value();
    return {KernelKind::kLimitQ, [conn, a_l](const PoweredPoint& a, const PoweredPoint& b) {
              return conn(a, b) / a_l;
            }};
  }

  Partition make_partition() const {
    return sinrlab::make_partition(make_domain(), eta_cap, domain_res, power_res);
  }
};

}  // namespace sinrlab
