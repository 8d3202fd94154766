#pragma once

// Two-layer compressible barotropic Navier-Stokes in rescaled variables on a
// y-invariant slice T^1 x (0,1), one sigma grid per layer.
//
// Layout per layer (ns rows, nx columns): cell-centred H*rho and H*rho*u at
// s_j = (j + 1/2)/ns; w on the ns + 1 s-faces. Row 0 of layer 1 and row ns of
// layer 2 are walls. The interface carries one normal velocity vn per column,
// vn = w_k - alpha_x u_k, and alpha_t = vn.

#include <array>

#include <Eigen/Dense>

#include "stratavg/eos.hpp"
#include "stratavg/regime.hpp"

namespace stratavg {

struct MicroGrid {
  int nx = 128;
  int ns = 32;

  double dx() const { return 1.0 / nx; }
  double ds() const { return 1.0 / ns; }
  bool operator==(const MicroGrid&) const = default;
};

struct MicroOptions {
  double cfl = 0.45;
  bool implicit_viscosity = true;
  double alpha_min = 1e-3;
  bool operator==(const MicroOptions&) const = default;
};

struct MicroConfig {
  MicroGrid grid;
  ScalingRegime regime;
  std::array<BarotropicLaw<double>, 2> laws{};
  MicroOptions options;
};

struct LayerFields {
  Eigen::ArrayXXd mass;  // H rho
  Eigen::ArrayXXd xmom;  // H rho u
  Eigen::ArrayXXd w;     // face values, ns + 1 rows
};

struct MicroFields {
  std::array<LayerFields, 2> layer;
  Eigen::ArrayXd alpha;
  Eigen::ArrayXd vn;
  double time = 0.0;

  int nx() const { return static_cast<int>(alpha.size()); }
  int ns() const { return static_cast<int>(layer[0].mass.rows()); }
};

MicroFields zero_fields(const MicroGrid& grid);

/// Layer thickness per column: alpha for layer 0, 1 - alpha for layer 1.
Eigen::ArrayXd layer_thickness(const Eigen::ArrayXd& alpha, int k);

Eigen::ArrayXXd density(const MicroFields& f, int k);
Eigen::ArrayXXd velocity(const MicroFields& f, int k);
Eigen::ArrayXXd layer_pressure(const MicroFields& f, const MicroConfig& cfg, int k);

/// Physical height of the cell centres of layer k.
Eigen::ArrayXXd cell_heights(const MicroFields& f, int k);

/// Total mass of layer k, sum of H rho ds dx.
double phase_mass(const MicroFields& f, int k);

struct SigmaDerivatives {
  Eigen::ArrayXXd dx;  // d/dx at fixed z
  Eigen::ArrayXXd dz;
};

/// Chain-rule derivatives of a cell-centred field of layer k: central in x
/// (periodic) and in s, second-order one-sided at the layer's s-boundaries.
SigmaDerivatives sigma_derivatives(const Eigen::ArrayXXd& field, const Eigen::ArrayXd& alpha, int k,
                                   const MicroGrid& grid, double alpha_min = 1e-3);

struct WallTrace {
  Eigen::ArrayXd ghost;      // ghost-cell u enforcing the Robin relation
  Eigen::ArrayXd wall_u;     // u at the wall
  Eigen::ArrayXd shear;      // tau_xz at the wall
  Eigen::ArrayXd implicit;   // coefficient K with G-flux magnitude K u_adjacent
};

/// Sets w = 0 on both walls and returns the Robin ghost data (index 0: bottom of
/// layer 0, index 1: top of layer 1).
std::array<WallTrace, 2> apply_wall_conditions(MicroFields& f, const MicroConfig& cfg);

struct InterfaceCoupling {
  Eigen::ArrayXd alpha_x;
  Eigen::ArrayXd trace_u1, trace_u2;  // one-sided traces from the ghost solve
  Eigen::ArrayXd shear;               // tangential stress S shared by both sides
  Eigen::ArrayXd traction_x;          // x-traction, averaged over the two sides
  Eigen::ArrayXd implicit;            // K with traction_x = K (u2_bot - u1_top) + explicit part
  Eigen::ArrayXd tau_xz;              // interface tau_xz averaged over the two sides
};

/// Fills the interface w rows from vn and solves the 2x2 Navier/stress ghost system per column.
InterfaceCoupling apply_interface_conditions(MicroFields& f, const MicroConfig& cfg);

/// Time derivatives of every stored field, all terms explicit. Rates of the
/// boundary w rows are zero; the interface rate is in vn.
MicroFields micro_rhs(const MicroFields& f, const MicroConfig& cfg);

/// Largest stable step: horizontal and vertical acoustics, plus vertical
/// viscosity when it is explicit.
double micro_stable_dt(const MicroFields& f, const MicroConfig& cfg);

/// SSP-RK3 for the non-stiff part, then backward Euler for the vertical viscous
/// operator (or everything in RK3 when implicit_viscosity is off).
MicroFields micro_step(const MicroFields& f, const MicroConfig& cfg, double dt);

/// Advances to t_end with stable steps; returns the number of steps taken.
int micro_run(MicroFields& f, const MicroConfig& cfg, double t_end);

}  // namespace stratavg
