#pragma once

// Finite-volume solver for the averaged two-phase models on a periodic 1D grid:
// two-velocity barotropic, two-velocity with energy (NSF), and one-velocity.

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stratavg/eos.hpp"
#include "stratavg/regime.hpp"

namespace stratavg {

enum class ModelVariant { TwoVelocityBarotropic, TwoVelocityNsf, OneVelocity };

std::string to_string(ModelVariant v);
ModelVariant variant_from_string(const std::string& name);

struct PhaseLaws {
  std::array<BarotropicLaw<double>, 2> barotropic{};
  std::array<CompleteEos<double>, 2> complete{};
};

struct SourceParams {
  std::array<double, 2> kappa_hat{0.0, 0.0};
  double kappa_i_hat = 0.0;
  double h_c_hat = 0.0;
  std::array<double, 2> beta_hat{0.0, 0.0};
  int delta_xi = 1;
  int delta_gamma = 1;
  double w_pi = 0.5;
  bool quadratic_friction = false;

  static SourceParams from_regime(const ScalingRegime& r, double w_pi = 0.5, bool quadratic = false);
};

enum class Integrator { ForwardEuler, SspRk2 };
enum class SourceSplitting { Unsplit, Strang };

struct StepOptions {
  double cfl = 0.45;
  Integrator integrator = Integrator::ForwardEuler;
  SourceSplitting splitting = SourceSplitting::Unsplit;
  double positivity_floor = 1e-12;
};

struct MacroModel {
  ModelVariant variant = ModelVariant::TwoVelocityBarotropic;
  PhaseLaws laws;
  SourceParams params;
  ClosureOptions closure;

  int num_vars() const;
};

/// Primitive state of one cell. Index 0 is phase 1. For the one-velocity model
/// both entries of v hold the common velocity.
struct MacroState {
  double alpha1 = 0.5;
  std::array<double, 2> rho{1.0, 1.0};
  std::array<double, 2> v{0.0, 0.0};
  std::array<double, 2> p{0.0, 0.0};
  std::array<double, 2> E{0.0, 0.0};      // specific total energy (NSF)
  std::array<double, 2> e{0.0, 0.0};      // specific internal energy (NSF)
  std::array<double, 2> theta{0.0, 0.0};  // temperature (NSF)

  double alpha(int k) const { return k == 0 ? alpha1 : 1.0 - alpha1; }
};

// Conserved layout: two-velocity (m1, m2, q1, q2[, En1, En2]); one-velocity (m1, m2, q).
using Conserved = Eigen::VectorXd;

Conserved conservative_from_primitive(const MacroModel& model, const MacroState& s);

/// Recovers the primitive state, closing alpha1 by pressure equilibrium.
MacroState primitive_from_conserved(const MacroModel& model, const Eigen::Ref<const Eigen::VectorXd>& u,
                                    double alpha_guess = -1.0);

Eigen::VectorXd convective_flux(const MacroModel& model, const MacroState& s);

/// Largest |v_k| + c_k of a cell.
double max_wave_speed(const MacroModel& model, const MacroState& s);

double interface_pressure(const MacroState& left, const MacroState& right, double w_pi);

/// Face contribution p_i (alpha_k,R - alpha_k,L) / dx to each phase momentum;
/// the two entries cancel exactly.
std::array<double, 2> nonconservative_terms(const MacroState& left, const MacroState& right,
                                            const SourceParams& params, double dx);

/// Pointwise friction sources, laid out like the conserved vector.
Eigen::VectorXd friction_sources(const MacroModel& model, const MacroState& s);

/// Heat diffusion and contact exchange energy sources of cell `center` (NSF).
std::array<double, 2> heat_sources(const MacroState& left, const MacroState& center, const MacroState& right,
                                   const SourceParams& params, double dx);

/// Periodic grid of conserved cells (rows) with the last closure cached.
struct MacroGrid {
  Eigen::MatrixXd U;
  Eigen::VectorXd alpha1;
  double dx = 1.0;

  Eigen::Index size() const { return U.rows(); }
  std::vector<MacroState> states(const MacroModel& model) const;
};

MacroGrid make_grid(const MacroModel& model, const std::vector<MacroState>& cells, double dx);

/// Largest dt allowed by the CFL number and the explicit source stiffness.
double admissible_dt(const MacroModel& model, const MacroGrid& grid, double cfl);

/// One step of the two-velocity models (barotropic or NSF).
MacroGrid hyperbolic_step(const MacroModel& model, const MacroGrid& grid, double dt, const StepOptions& opt = {});

/// One step of the one-velocity model.
MacroGrid one_velocity_step(const MacroModel& model, const MacroGrid& grid, double dt,
                            const StepOptions& opt = {});

/// Dispatches on the variant.
MacroGrid macro_step(const MacroModel& model, const MacroGrid& grid, double dt, const StepOptions& opt = {});

/// Runs to t_end with CFL-limited steps; the last step lands on t_end.
MacroGrid macro_run(const MacroModel& model, MacroGrid grid, double t_end, const StepOptions& opt = {});

}  // namespace stratavg
