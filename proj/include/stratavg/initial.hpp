#pragma once

// One initial recipe shared by the micro and macro solvers:
// f(x) = f0 + f1 sin(2 pi mode x) for the interface height, pressure and velocities.

#include <array>
#include <vector>

#include "stratavg/macro_model.hpp"
#include "stratavg/micro_solver.hpp"

namespace stratavg {

struct InitialProfile {
  double alpha1 = 0.5;
  double alpha_amp = 0.0;
  double pressure = 1.0;
  double pressure_amp = 0.0;
  std::array<double, 2> velocity{0.0, 0.0};
  std::array<double, 2> velocity_amp{0.0, 0.0};
  std::array<double, 2> temperature{1.0, 1.0};
  int mode = 1;
  bool balanced_w = true;

  double alpha_at(double x) const;
  double pressure_at(double x) const;
  double velocity_at(int k, double x) const;
  bool operator==(const InitialProfile&) const = default;
};

/// Pressure-equilibrium states at the cell centres (i + 1/2) / nx.
std::vector<MacroState> macro_initial(const MacroModel& model, const InitialProfile& init, int nx);

/// z-independent densities and velocities per column. With balanced_w the
/// vertical velocity is the linear profile that keeps rho_k uniform in z to first
/// order, and vn the matching interface velocity; otherwise w = vn = 0.
MicroFields micro_initial(const MicroConfig& cfg, const InitialProfile& init);

}  // namespace stratavg
