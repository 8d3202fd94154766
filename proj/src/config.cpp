#include "stratavg/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "stratavg/errors.hpp"

namespace stratavg {

namespace {

class Reader {
 public:
  std::string where(const std::string& key) const {
    const auto it = lines_.find(key);
    return it == lines_.end() ? key : key + " (line " + std::to_string(it->second) + ")";
  }

  // Rejects keys outside `allowed`; returns false when the section is absent.
  bool section(const YAML::Node& root, const std::string& name, const std::set<std::string>& allowed,
               YAML::Node& out, const std::string& parent = "") {
    const YAML::Node found = root[name];
    if (!found) return false;
    out.reset(found);
    const std::string full = parent.empty() ? name : parent + "." + name;
    if (!out.IsMap()) throw ConfigError("expected a mapping", where(full));
    check(out, full, allowed);
    return true;
  }

  void check(const YAML::Node& map, const std::string& prefix, const std::set<std::string>& allowed) {
    for (const auto& kv : map) {
      const std::string key = kv.first.as<std::string>();
      const std::string full = prefix.empty() ? key : prefix + "." + key;
      lines_[full] = kv.first.Mark().line + 1;
      if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "'", where(full));
    }
  }

  template <typename T>
  void get(const YAML::Node& map, const std::string& prefix, const std::string& key, T& out) {
    const YAML::Node n = map[key];
    if (!n) return;
    const std::string full = prefix + "." + key;
    try {
      out = n.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError("invalid value", where(full));
    }
  }

  // A scalar applies to both phases; a 2-sequence sets them individually.
  template <typename T>
  void get_pair(const YAML::Node& map, const std::string& prefix, const std::string& key, std::array<T, 2>& out) {
    const YAML::Node n = map[key];
    if (!n) return;
    const std::string full = prefix + "." + key;
    try {
      if (n.IsSequence()) {
        if (n.size() != 2) throw ConfigError("expected two values (phase 1, phase 2)", where(full));
        out = {n[0].as<T>(), n[1].as<T>()};
      } else {
        out.fill(n.as<T>());
      }
    } catch (const YAML::Exception&) {
      throw ConfigError("invalid value", where(full));
    }
  }

 private:
  std::map<std::string, int> lines_;
};

void require(bool ok, const std::string& constraint, const Reader& r, const std::string& key) {
  if (!ok) throw ConfigError("constraint " + constraint + " violated", r.where(key));
}

BarotropicLaw<double> barotropic_of(const EosConfig& e) {
  return e.pi0 == 0.0 ? BarotropicLaw<double>::gamma_law(e.kappa, e.gamma)
                      : BarotropicLaw<double>::stiffened(e.kappa, e.gamma, e.pi0);
}

CompleteEos<double> complete_of(const EosConfig& e) {
  return e.pi0 == 0.0 ? CompleteEos<double>::ideal(e.gamma, e.cv) : CompleteEos<double>::stiffened(e.gamma, e.cv, e.pi0);
}

void validate(const ExperimentConfig& c, const Reader& r) {
  const ScalingRegime& g = c.regime;
  require(g.eps > 0 && g.eps < 1, "0<ε<1", r, "regime.eps");
  require(g.tau > 0 && g.tau < 2, "0<τ<2", r, "regime.tau");
  require(g.xi >= 1, "ξ≥1", r, "regime.xi");
  require(std::isfinite(g.zeta), "ζ finite", r, "regime.zeta");
  require(g.gamma >= 0 && g.gamma < 2, "0≤γ<2", r, "regime.gamma");
  for (int k = 0; k < 2; ++k) {
    require(g.mu_hat[k] > 0, "μ̂>0", r, "regime.mu_hat");
    require(g.lambda_hat[k] >= 0, "λ̂≥0", r, "regime.lambda_hat");
    require(g.kappa_hat[k] >= 0, "κ̂≥0", r, "regime.kappa_hat");
    require(g.beta_hat[k] >= 0, "β̂≥0", r, "regime.beta_hat");
  }
  require(g.kappa_i_hat >= 0, "κ̂_i≥0", r, "regime.kappa_i_hat");
  require(g.h_c_hat >= 0, "ĥ_c≥0", r, "regime.h_c_hat");

  const bool energy = c.variant == ModelVariant::TwoVelocityNsf;
  for (int k = 0; k < 2; ++k) {
    const std::string key = "eos.phase" + std::to_string(k + 1);
    const EosConfig& e = c.eos[k];
    require(e.kind == "barotropic" || e.kind == "complete", "kind ∈ {barotropic, complete}", r, key);
    require(energy == (e.kind == "complete"),
            energy ? "two-velocity-nsf needs complete EOS" : "barotropic models need barotropic EOS", r, key);
    try {
      if (energy) validate(complete_of(e));
      else validate(barotropic_of(e));
    } catch (const DomainError& err) {
      throw ConfigError(err.what(), r.where(key));
    }
  }

  require(c.grid.nx >= 4, "nx≥4", r, "grid.nx");
  require(c.grid.ns >= 3, "ns≥3", r, "grid.ns");
  require(c.time.cfl > 0 && c.time.cfl <= 1, "0<cfl≤1", r, "time.cfl");
  require(c.time.t_end > 0, "t_end>0", r, "time.t_end");
  require(c.time.integrator == "forward-euler" || c.time.integrator == "ssp-rk2",
          "integrator ∈ {forward-euler, ssp-rk2}", r, "time.integrator");
  require(c.time.splitting == "unsplit" || c.time.splitting == "strang", "splitting ∈ {unsplit, strang}", r,
          "time.splitting");
  require(c.time.snapshots >= 0, "snapshots≥0", r, "time.snapshots");

  const InitialProfile& ip = c.initial;
  require(ip.mode >= 1, "mode≥1", r, "initial.mode");
  const double amin = c.micro.alpha_min;
  require(ip.alpha1 - std::abs(ip.alpha_amp) > amin && ip.alpha1 + std::abs(ip.alpha_amp) < 1 - amin,
          "alpha_min<alpha1±alpha_amp<1-alpha_min", r, "initial.alpha1");
  const double pmin = ip.pressure - std::abs(ip.pressure_amp);
  for (int k = 0; k < 2; ++k) {
    require(ip.temperature[k] > 0, "temperature>0", r, "initial.temperature");
    require(pmin + c.eos[k].pi0 > 0, "p+π₀>0", r, "initial.pressure");
  }

  require(c.source.w_pi >= 0 && c.source.w_pi <= 1, "0≤w_pi≤1", r, "source.w_pi");
  require(c.micro.alpha_min > 0 && c.micro.alpha_min < 0.5, "0<alpha_min<1/2", r, "micro.alpha_min");
  require(c.micro.cfl > 0 && c.micro.cfl <= 1, "0<cfl≤1", r, "micro.cfl");
  require(c.micro.spinup >= 0, "spinup≥0", r, "micro.spinup");

  const VerifySection& v = c.verify;
  require(v.eps.size() >= 3, "at least 3 eps values", r, "verify.eps");
  for (std::size_t i = 0; i < v.eps.size(); ++i) {
    require(v.eps[i] > 0 && v.eps[i] < 1, "0<ε<1", r, "verify.eps");
    if (i > 0) require(v.eps[i] < v.eps[i - 1], "eps strictly decreasing", r, "verify.eps");
  }
  require(v.t_end > 0, "t_end>0", r, "verify.t_end");
  require(v.spinup >= 0, "spinup≥0", r, "verify.spinup");
  require(v.snapshot_interval > 0, "snapshot_interval>0", r, "verify.snapshot_interval");
  require(v.max_refine >= 1 && (v.max_refine & (v.max_refine - 1)) == 0, "max_refine a power of 2", r,
          "verify.max_refine");
  require(v.subordination > 0, "subordination>0", r, "verify.subordination");

  const EigenSection& e = c.eigen;
  require(std::isfinite(e.pressure), "pressure finite", r, "eigen.pressure");
  for (double a : e.alpha1) require(a > 0 && a < 1, "0<alpha1<1", r, "eigen.alpha1");
  for (double d : e.dv_over_c) require(d >= 0, "dv_over_c≥0", r, "eigen.dv_over_c");
  require(e.random_states >= 0, "random_states≥0", r, "eigen.random_states");
  require(e.theta1 > 0 && e.theta2 > 0, "theta>0", r, "eigen.theta1");

  require(!c.output.prefix.empty() && c.output.prefix.find('/') == std::string::npos, "prefix is a plain name", r,
          "output.prefix");
}

template <typename T>
void emit_pair(YAML::Emitter& out, const char* key, const std::array<T, 2>& v) {
  out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq << v[0] << v[1] << YAML::EndSeq;
}

void emit_list(YAML::Emitter& out, const char* key, const std::vector<double>& v) {
  out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (double x : v) out << x;
  out << YAML::EndSeq;
}

}  // namespace

MacroModel ExperimentConfig::macro_model() const {
  MacroModel m;
  m.variant = variant;
  for (int k = 0; k < 2; ++k) {
    if (eos[k].kind == "complete") m.laws.complete[k] = complete_of(eos[k]);
    else m.laws.barotropic[k] = barotropic_of(eos[k]);
  }
  m.params = SourceParams::from_regime(regime, source.w_pi, source.quadratic_friction);
  return m;
}

StepOptions ExperimentConfig::step_options() const {
  StepOptions o;
  o.cfl = time.cfl;
  o.integrator = time.integrator == "ssp-rk2" ? Integrator::SspRk2 : Integrator::ForwardEuler;
  o.splitting = time.splitting == "strang" ? SourceSplitting::Strang : SourceSplitting::Unsplit;
  return o;
}

MicroConfig ExperimentConfig::micro_config() const {
  MicroConfig m;
  m.grid = {grid.nx, grid.ns};
  m.regime = regime;
  m.laws = {barotropic_of(eos[0]), barotropic_of(eos[1])};
  m.options.cfl = micro.cfl;
  m.options.implicit_viscosity = micro.implicit_viscosity;
  m.options.alpha_min = micro.alpha_min;
  return m;
}

StudyConfig ExperimentConfig::study_config() const {
  StudyConfig s;
  s.micro = micro_config();
  s.variant = variant;
  s.w_pi = source.w_pi;
  s.quadratic_friction = source.quadratic_friction;
  s.initial = initial;
  s.eps = verify.eps;
  s.t_end = verify.t_end;
  s.spinup = verify.spinup;
  s.snapshot_interval = verify.snapshot_interval;
  s.max_refine = verify.max_refine;
  s.subordination = verify.subordination;
  s.macro_step = step_options();
  s.parallel = verify.parallel;
  s.compare_micro = verify.compare_micro;
  return s;
}

ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, "line " + std::to_string(e.mark.line + 1));
  }
  ExperimentConfig c;
  Reader r;
  if (!root || root.IsNull()) {
    validate(c, r);
    return c;
  }
  if (!root.IsMap()) throw ConfigError("expected a mapping at the top level", "line 1");
  r.check(root, "",
          {"model", "regime", "eos", "grid", "time", "initial", "source", "micro", "verify", "eigen", "output",
           "seed"});

  if (root["model"]) {
    try {
      c.variant = variant_from_string(root["model"].as<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError(e.what(), r.where("model"));
    }
  }
  if (root["seed"]) r.get(root, "", "seed", c.seed);

  YAML::Node n;
  if (r.section(root, "regime", {"eps", "tau", "xi", "zeta", "gamma", "mu_hat", "lambda_hat", "kappa_hat",
                                 "kappa_i_hat", "beta_hat", "h_c_hat"}, n)) {
    r.get(n, "regime", "eps", c.regime.eps);
    r.get(n, "regime", "tau", c.regime.tau);
    r.get(n, "regime", "xi", c.regime.xi);
    r.get(n, "regime", "zeta", c.regime.zeta);
    r.get(n, "regime", "gamma", c.regime.gamma);
    r.get_pair(n, "regime", "mu_hat", c.regime.mu_hat);
    r.get_pair(n, "regime", "lambda_hat", c.regime.lambda_hat);
    r.get_pair(n, "regime", "kappa_hat", c.regime.kappa_hat);
    r.get(n, "regime", "kappa_i_hat", c.regime.kappa_i_hat);
    r.get_pair(n, "regime", "beta_hat", c.regime.beta_hat);
    r.get(n, "regime", "h_c_hat", c.regime.h_c_hat);
  }
  if (c.variant == ModelVariant::TwoVelocityNsf) {
    for (auto& e : c.eos) e = EosConfig{"complete", 1.0, 1.4, 1.0, 0.0};
  }
  if (r.section(root, "eos", {"phase1", "phase2"}, n)) {
    for (int k = 0; k < 2; ++k) {
      const std::string name = "phase" + std::to_string(k + 1);
      YAML::Node p;
      if (!r.section(n, name, {"kind", "kappa", "gamma", "cv", "pi0"}, p, "eos")) continue;
      const std::string pre = "eos." + name;
      r.get(p, pre, "kind", c.eos[k].kind);
      r.get(p, pre, "kappa", c.eos[k].kappa);
      r.get(p, pre, "gamma", c.eos[k].gamma);
      r.get(p, pre, "cv", c.eos[k].cv);
      r.get(p, pre, "pi0", c.eos[k].pi0);
    }
  }
  if (r.section(root, "grid", {"nx", "ns"}, n)) {
    r.get(n, "grid", "nx", c.grid.nx);
    r.get(n, "grid", "ns", c.grid.ns);
  }
  if (r.section(root, "time", {"cfl", "t_end", "integrator", "splitting", "snapshots"}, n)) {
    r.get(n, "time", "cfl", c.time.cfl);
    r.get(n, "time", "t_end", c.time.t_end);
    r.get(n, "time", "integrator", c.time.integrator);
    r.get(n, "time", "splitting", c.time.splitting);
    r.get(n, "time", "snapshots", c.time.snapshots);
  }
  if (r.section(root, "initial", {"alpha1", "alpha_amp", "pressure", "pressure_amp", "velocity", "velocity_amp",
                                  "temperature", "mode", "balanced_w"}, n)) {
    r.get(n, "initial", "alpha1", c.initial.alpha1);
    r.get(n, "initial", "alpha_amp", c.initial.alpha_amp);
    r.get(n, "initial", "pressure", c.initial.pressure);
    r.get(n, "initial", "pressure_amp", c.initial.pressure_amp);
    r.get_pair(n, "initial", "velocity", c.initial.velocity);
    r.get_pair(n, "initial", "velocity_amp", c.initial.velocity_amp);
    r.get_pair(n, "initial", "temperature", c.initial.temperature);
    r.get(n, "initial", "mode", c.initial.mode);
    r.get(n, "initial", "balanced_w", c.initial.balanced_w);
  }
  if (r.section(root, "source", {"w_pi", "quadratic_friction"}, n)) {
    r.get(n, "source", "w_pi", c.source.w_pi);
    r.get(n, "source", "quadratic_friction", c.source.quadratic_friction);
  }
  if (r.section(root, "micro", {"implicit_viscosity", "alpha_min", "cfl", "spinup"}, n)) {
    r.get(n, "micro", "implicit_viscosity", c.micro.implicit_viscosity);
    r.get(n, "micro", "alpha_min", c.micro.alpha_min);
    r.get(n, "micro", "cfl", c.micro.cfl);
    r.get(n, "micro", "spinup", c.micro.spinup);
  }
  if (r.section(root, "verify", {"eps", "t_end", "spinup", "snapshot_interval", "max_refine", "subordination",
                                 "parallel", "compare_micro"}, n)) {
    r.get(n, "verify", "eps", c.verify.eps);
    r.get(n, "verify", "t_end", c.verify.t_end);
    r.get(n, "verify", "spinup", c.verify.spinup);
    r.get(n, "verify", "snapshot_interval", c.verify.snapshot_interval);
    r.get(n, "verify", "max_refine", c.verify.max_refine);
    r.get(n, "verify", "subordination", c.verify.subordination);
    r.get(n, "verify", "parallel", c.verify.parallel);
    r.get(n, "verify", "compare_micro", c.verify.compare_micro);
  }
  if (r.section(root, "eigen", {"pressure", "alpha1", "dv_over_c", "random_states", "theta1", "theta2"}, n)) {
    r.get(n, "eigen", "pressure", c.eigen.pressure);
    r.get(n, "eigen", "alpha1", c.eigen.alpha1);
    r.get(n, "eigen", "dv_over_c", c.eigen.dv_over_c);
    r.get(n, "eigen", "random_states", c.eigen.random_states);
    r.get(n, "eigen", "theta1", c.eigen.theta1);
    r.get(n, "eigen", "theta2", c.eigen.theta2);
  }
  if (r.section(root, "output", {"root", "prefix"}, n)) {
    r.get(n, "output", "root", c.output.root);
    r.get(n, "output", "prefix", c.output.prefix);
  }
  validate(c, r);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file", path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string emit_config(const ExperimentConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "model" << YAML::Value << to_string(c.variant);
  out << YAML::Key << "seed" << YAML::Value << c.seed;

  const ScalingRegime& g = c.regime;
  out << YAML::Key << "regime" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "eps" << YAML::Value << g.eps;
  out << YAML::Key << "tau" << YAML::Value << g.tau;
  out << YAML::Key << "xi" << YAML::Value << g.xi;
  out << YAML::Key << "zeta" << YAML::Value << g.zeta;
  out << YAML::Key << "gamma" << YAML::Value << g.gamma;
  emit_pair(out, "mu_hat", g.mu_hat);
  emit_pair(out, "lambda_hat", g.lambda_hat);
  emit_pair(out, "kappa_hat", g.kappa_hat);
  out << YAML::Key << "kappa_i_hat" << YAML::Value << g.kappa_i_hat;
  emit_pair(out, "beta_hat", g.beta_hat);
  out << YAML::Key << "h_c_hat" << YAML::Value << g.h_c_hat;
  out << YAML::EndMap;

  out << YAML::Key << "eos" << YAML::Value << YAML::BeginMap;
  for (int k = 0; k < 2; ++k) {
    const EosConfig& e = c.eos[k];
    out << YAML::Key << ("phase" + std::to_string(k + 1)) << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << e.kind;
    out << YAML::Key << "kappa" << YAML::Value << e.kappa;
    out << YAML::Key << "gamma" << YAML::Value << e.gamma;
    out << YAML::Key << "cv" << YAML::Value << e.cv;
    out << YAML::Key << "pi0" << YAML::Value << e.pi0;
    out << YAML::EndMap;
  }
  out << YAML::EndMap;

  out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "nx" << YAML::Value << c.grid.nx;
  out << YAML::Key << "ns" << YAML::Value << c.grid.ns;
  out << YAML::EndMap;

  out << YAML::Key << "time" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "cfl" << YAML::Value << c.time.cfl;
  out << YAML::Key << "t_end" << YAML::Value << c.time.t_end;
  out << YAML::Key << "integrator" << YAML::Value << c.time.integrator;
  out << YAML::Key << "splitting" << YAML::Value << c.time.splitting;
  out << YAML::Key << "snapshots" << YAML::Value << c.time.snapshots;
  out << YAML::EndMap;

  const InitialProfile& ip = c.initial;
  out << YAML::Key << "initial" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "alpha1" << YAML::Value << ip.alpha1;
  out << YAML::Key << "alpha_amp" << YAML::Value << ip.alpha_amp;
  out << YAML::Key << "pressure" << YAML::Value << ip.pressure;
  out << YAML::Key << "pressure_amp" << YAML::Value << ip.pressure_amp;
  emit_pair(out, "velocity", ip.velocity);
  emit_pair(out, "velocity_amp", ip.velocity_amp);
  emit_pair(out, "temperature", ip.temperature);
  out << YAML::Key << "mode" << YAML::Value << ip.mode;
  out << YAML::Key << "balanced_w" << YAML::Value << ip.balanced_w;
  out << YAML::EndMap;

  out << YAML::Key << "source" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "w_pi" << YAML::Value << c.source.w_pi;
  out << YAML::Key << "quadratic_friction" << YAML::Value << c.source.quadratic_friction;
  out << YAML::EndMap;

  out << YAML::Key << "micro" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "implicit_viscosity" << YAML::Value << c.micro.implicit_viscosity;
  out << YAML::Key << "alpha_min" << YAML::Value << c.micro.alpha_min;
  out << YAML::Key << "cfl" << YAML::Value << c.micro.cfl;
  out << YAML::Key << "spinup" << YAML::Value << c.micro.spinup;
  out << YAML::EndMap;

  const VerifySection& v = c.verify;
  out << YAML::Key << "verify" << YAML::Value << YAML::BeginMap;
  emit_list(out, "eps", v.eps);
  out << YAML::Key << "t_end" << YAML::Value << v.t_end;
  out << YAML::Key << "spinup" << YAML::Value << v.spinup;
  out << YAML::Key << "snapshot_interval" << YAML::Value << v.snapshot_interval;
  out << YAML::Key << "max_refine" << YAML::Value << v.max_refine;
  out << YAML::Key << "subordination" << YAML::Value << v.subordination;
  out << YAML::Key << "parallel" << YAML::Value << v.parallel;
  out << YAML::Key << "compare_micro" << YAML::Value << v.compare_micro;
  out << YAML::EndMap;

  const EigenSection& e = c.eigen;
  out << YAML::Key << "eigen" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "pressure" << YAML::Value << e.pressure;
  emit_list(out, "alpha1", e.alpha1);
  emit_list(out, "dv_over_c", e.dv_over_c);
  out << YAML::Key << "random_states" << YAML::Value << e.random_states;
  out << YAML::Key << "theta1" << YAML::Value << e.theta1;
  out << YAML::Key << "theta2" << YAML::Value << e.theta2;
  out << YAML::EndMap;

  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "root" << YAML::Value << c.output.root;
  out << YAML::Key << "prefix" << YAML::Value << c.output.prefix;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::vector<std::string> config_warnings(const ExperimentConfig& cfg) { return scaling_warnings(cfg.regime); }

}  // namespace stratavg
