#pragma once

// Quasilinear forms of the averaged models and their spectra.

#include <Eigen/Dense>

#include "stratavg/macro_model.hpp"

namespace stratavg {

/// dV/dt + A dV/dx = 0 in primitive variables
/// (alpha1, rho1, v1, v2[, e1, e2]) or, for one velocity, (alpha1, rho1, v).
struct QuasilinearForm {
  ModelVariant variant = ModelVariant::TwoVelocityBarotropic;
  MacroState state;
  double w_pi = 0.5;
  Eigen::MatrixXd A;
};

/// Closure-consistent state at pressure p. Temperatures are used by the energy variant only.
MacroState equilibrium_state(const MacroModel& model, double alpha1, double p, double v1, double v2,
                             double theta1 = 1.0, double theta2 = 1.0);

Eigen::VectorXd primitive_vector(const MacroModel& model, const MacroState& s);

/// Inverse of primitive_vector; rho2 follows from pressure equilibrium.
MacroState state_from_primitive_vector(const MacroModel& model, const Eigen::Ref<const Eigen::VectorXd>& V);

QuasilinearForm assemble_quasilinear(const MacroModel& model, const MacroState& s);

/// Conserved-variable coefficient matrix by centered differences through the closure.
Eigen::MatrixXd conserved_jacobian_fd(const MacroModel& model, const MacroState& s, double rel_step = 1e-5);

/// dU/dV by centered differences.
Eigen::MatrixXd primitive_transform_fd(const MacroModel& model, const MacroState& s, double rel_step = 1e-5);

/// The finite-difference matrix expressed in primitive variables, T^-1 A_cons T.
Eigen::MatrixXd quasilinear_fd(const MacroModel& model, const MacroState& s, double rel_step = 1e-5);

/// Long-wave sound speed of the pressure-equilibrium mixture.
double wood_sound_speed(const MacroModel& model, const MacroState& s);

struct Spectrum {
  Eigen::VectorXcd values;
  double matrix_norm = 0.0;   // Frobenius norm of A
  double max_residual = 0.0;  // max ||(A - lambda I) v|| / ||v||

  double max_imag() const;
};

/// Eigenvalues with per-eigenvector residual check at 1e-8 ||A||.
Spectrum spectrum(const QuasilinearForm& form);
Spectrum spectrum(const Eigen::MatrixXd& A);

struct HyperbolicityMap {
  Eigen::VectorXd dv_over_c;
  Eigen::VectorXd alpha1;
  Eigen::MatrixXd max_imag;       // rows: alpha1, cols: dv/c
  Eigen::MatrixXd max_imag_rel;   // divided by ||A||
};

/// Sweeps relative velocity (v1 = -v2 = dv/2) and volume fraction at pressure p.
/// The one-velocity model uses v = dv instead.
HyperbolicityMap hyperbolicity_map(const MacroModel& model, double p, const Eigen::VectorXd& dv_over_c,
                                   const Eigen::VectorXd& alpha1, double theta1 = 1.0, double theta2 = 1.0);

}  // namespace stratavg
