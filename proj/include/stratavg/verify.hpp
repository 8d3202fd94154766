#pragma once

// Micro-vs-averaged-model comparison across a decreasing sequence of eps.

#include <array>
#include <string>
#include <vector>

#include "stratavg/initial.hpp"
#include "stratavg/macro_model.hpp"
#include "stratavg/micro_solver.hpp"

namespace stratavg {

struct OrderFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // rms of the log-log residuals
  int used = 0;
  std::vector<bool> excluded;
  bool valid = false;  // at least 3 usable points
};

/// Least squares of ln(error) against ln(eps). Points with error <= floor (or
/// non-finite) are excluded and flagged.
OrderFit fit_order(const std::vector<double>& eps, const std::vector<double>& errors, double floor = 0.0);

struct StudyConfig {
  MicroConfig micro;  // regime.eps is replaced per run
  ModelVariant variant = ModelVariant::TwoVelocityBarotropic;
  double w_pi = 0.5;
  bool quadratic_friction = false;
  InitialProfile initial;
  std::vector<double> eps{0.1, 0.05, 0.025};
  double t_end = 0.5;
  double spinup = 0.1;  // micro time run before t = 0 to prepare the data
  double snapshot_interval = 0.01;
  int max_refine = 32;
  double subordination = 0.2;
  StepOptions macro_step;
  bool parallel = true;
  bool compare_micro = true;  // false: the macro solution is compared with itself
};

/// Estimate diagnostics, in EstimateDiagnostics::sup() order.
inline const std::array<const char*, 8> kEstimateNames{
    "shear1", "shear2", "interface1", "interface2", "pressure", "tensor1", "tensor2", "velocity_gap"};

struct EpsilonRun {
  double eps = 0.0;
  bool ok = true;
  std::string failure;
  std::vector<double> l1, linf;  // per macro variable
  double momentum_l1 = 0.0;
  int macro_cells = 0;
  double macro_estimate = 0.0;
  bool subordinated = false;
  std::array<double, 8> estimates{};  // sup over snapshots in [0, t_end]
  int micro_steps = 0;
};

struct ConvergenceReport {
  ScalingRegime regime;
  ModelVariant variant = ModelVariant::TwoVelocityBarotropic;
  std::vector<std::string> variables;
  std::vector<EpsilonRun> runs;
  std::vector<OrderFit> l1_fit, linf_fit;
  OrderFit momentum_fit;
  std::array<OrderFit, 8> estimate_fit;
  double predicted_momentum = 0.0;
  double predicted_pressure = 0.0;
  std::array<double, 8> predicted_estimates{};
  std::vector<ScalingCheck> checks;
  std::vector<std::string> flags;

  std::vector<double> eps() const;
};

/// min(tau, 2 - tau, xi - 1 when xi > 1).
double predicted_momentum_order(const ScalingRegime& r);

/// Conservative piecewise-linear refinement by an integer factor; averaging the
/// result over each block returns the input.
MacroGrid prolong(const MacroGrid& coarse, int factor);
Eigen::MatrixXd restrict_average(const Eigen::MatrixXd& fine, int factor);

ConvergenceReport run_convergence_study(const StudyConfig& cfg);

struct PressureStudy {
  std::vector<double> eps;
  std::vector<double> sup_gap;
  OrderFit fit;
  double predicted = 0.0;
  bool monotone = true;
};

PressureStudy pressure_equality_study(const ConvergenceReport& report);

}  // namespace stratavg
