#pragma once

// Experiment configuration: YAML in, validated structs out, and a YAML echo that
// parses back to an equal config.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "stratavg/hyperbolicity.hpp"
#include "stratavg/initial.hpp"
#include "stratavg/macro_model.hpp"
#include "stratavg/micro_solver.hpp"
#include "stratavg/regime.hpp"
#include "stratavg/verify.hpp"

namespace stratavg {

struct EosConfig {
  std::string kind = "barotropic";  // barotropic | complete
  double kappa = 1.0;
  double gamma = 1.4;
  double cv = 1.0;
  double pi0 = 0.0;
  bool operator==(const EosConfig&) const = default;
};

struct GridConfig {
  int nx = 128;
  int ns = 16;
  bool operator==(const GridConfig&) const = default;
};

struct TimeConfig {
  double cfl = 0.45;
  double t_end = 0.5;
  std::string integrator = "forward-euler";  // forward-euler | ssp-rk2
  std::string splitting = "unsplit";         // unsplit | strang
  int snapshots = 0;                          // extra evenly spaced outputs before t_end
  bool operator==(const TimeConfig&) const = default;
};

struct SourceConfig {
  double w_pi = 0.5;
  bool quadratic_friction = false;
  bool operator==(const SourceConfig&) const = default;
};

struct MicroSection {
  bool implicit_viscosity = true;
  double alpha_min = 1e-3;
  double cfl = 0.45;
  double spinup = 0.0;
  bool operator==(const MicroSection&) const = default;
};

struct VerifySection {
  std::vector<double> eps{0.1, 0.05, 0.025};
  double t_end = 0.5;
  double spinup = 0.1;
  double snapshot_interval = 0.01;
  int max_refine = 32;
  double subordination = 0.2;
  bool parallel = true;
  bool compare_micro = true;
  bool operator==(const VerifySection&) const = default;
};

struct EigenSection {
  double pressure = 1.0;
  std::vector<double> alpha1{0.1, 0.3, 0.5, 0.7, 0.9};
  std::vector<double> dv_over_c{0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0};
  int random_states = 1000;
  double theta1 = 1.0;
  double theta2 = 1.0;
  bool operator==(const EigenSection&) const = default;
};

struct OutputSection {
  std::string root = "out";
  std::string prefix = "run";
  bool operator==(const OutputSection&) const = default;
};

struct ExperimentConfig {
  ModelVariant variant = ModelVariant::TwoVelocityBarotropic;
  ScalingRegime regime;
  std::array<EosConfig, 2> eos{EosConfig{}, EosConfig{"barotropic", 1.0, 2.0, 1.0, 0.0}};
  GridConfig grid;
  TimeConfig time;
  InitialProfile initial;
  SourceConfig source;
  MicroSection micro;
  VerifySection verify;
  EigenSection eigen;
  OutputSection output;
  std::uint64_t seed = 0;

  bool operator==(const ExperimentConfig&) const = default;

  MacroModel macro_model() const;
  StepOptions step_options() const;
  MicroConfig micro_config() const;
  StudyConfig study_config() const;
};

/// Parses and validates; throws ConfigError naming the key and line of the first problem.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Effective config as YAML, every field written out.
std::string emit_config(const ExperimentConfig& cfg);

/// Scaling inequalities that do not hold; these are warnings, not errors.
std::vector<std::string> config_warnings(const ExperimentConfig& cfg);

}  // namespace stratavg
