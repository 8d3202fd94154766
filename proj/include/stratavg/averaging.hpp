#pragma once

// Vertical averages of micro fields and the estimate diagnostics that measure how
// far a micro solution is from the averaged-model ansatz.

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "stratavg/macro_model.hpp"
#include "stratavg/micro_solver.hpp"

namespace stratavg {

/// Mean of cell values over one layer column (midpoint rule on the sigma grid).
double vertical_average(const Eigen::Ref<const Eigen::ArrayXd>& column);

/// Density-weighted mean: sum(rho f) / sum(rho).
double favre_average(const Eigen::Ref<const Eigen::ArrayXd>& rho, const Eigen::Ref<const Eigen::ArrayXd>& f);

struct AveragedFields {
  Eigen::ArrayXd alpha1;
  std::array<Eigen::ArrayXd, 2> mass;      // alpha_k rho_bar_k
  std::array<Eigen::ArrayXd, 2> momentum;  // alpha_k rho_bar_k v_tilde_k
  std::array<Eigen::ArrayXd, 2> rho;       // rho_bar_k
  std::array<Eigen::ArrayXd, 2> velocity;  // v_tilde_k
  std::array<Eigen::ArrayXd, 2> pressure;  // p_bar_k
};

AveragedFields average_fields(const MicroFields& f, const MicroConfig& cfg);

/// Macro grid holding the projection; (m_k, q_k) are the column sums of the
/// stored micro variables, so mass and momentum carry over exactly.
MacroGrid project_to_macro(const MacroModel& model, const MicroFields& f);

struct EstimateDiagnostics {
  std::array<Eigen::ArrayXd, 2> shear;            // sup_z |u_k - v_tilde_k|
  std::array<Eigen::ArrayXd, 2> interface_gap;    // |p_k(alpha) - p_bar_k|
  Eigen::ArrayXd pressure_gap;                    // |p_bar_1 - p_bar_2|
  std::array<Eigen::ArrayXd, 2> tensor_gap;       // |Favre(u u) - v_tilde v_tilde|
  Eigen::ArrayXd velocity_gap;                    // |v_tilde_1 - v_tilde_2|

  /// Largest value over columns of each diagnostic, in the member order above
  /// (shear 1, shear 2, interface 1, interface 2, pressure, tensor 1, tensor 2, velocity).
  std::array<double, 8> sup() const;
};

EstimateDiagnostics estimate_diagnostics(const MicroFields& f, const MicroConfig& cfg);

}  // namespace stratavg
