#include "stratavg/initial.hpp"

#include <cmath>
#include <numbers>

#include "stratavg/hyperbolicity.hpp"

namespace stratavg {

namespace {

double wave(int mode, double x) { return std::sin(2 * std::numbers::pi * mode * x); }

Eigen::ArrayXd central_x(const Eigen::ArrayXd& a, double dx) {
  const Eigen::Index n = a.size();
  Eigen::ArrayXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = (a((i + 1) % n) - a((i + n - 1) % n)) / (2 * dx);
  return out;
}

}  // namespace

double InitialProfile::alpha_at(double x) const { return alpha1 + alpha_amp * wave(mode, x); }
double InitialProfile::pressure_at(double x) const { return pressure + pressure_amp * wave(mode, x); }
double InitialProfile::velocity_at(int k, double x) const {
  return velocity[k] + velocity_amp[k] * wave(mode, x);
}

std::vector<MacroState> macro_initial(const MacroModel& model, const InitialProfile& init, int nx) {
  std::vector<MacroState> cells;
  cells.reserve(nx);
  for (int i = 0; i < nx; ++i) {
    const double x = (i + 0.5) / nx;
    cells.push_back(equilibrium_state(model, init.alpha_at(x), init.pressure_at(x), init.velocity_at(0, x),
                                      init.velocity_at(1, x), init.temperature[0], init.temperature[1]));
  }
  return cells;
}

MicroFields micro_initial(const MicroConfig& cfg, const InitialProfile& init) {
  const int nx = cfg.grid.nx, ns = cfg.grid.ns;
  const double dx = cfg.grid.dx(), ds = cfg.grid.ds();
  MicroFields f = zero_fields(cfg.grid);
  std::array<Eigen::ArrayXd, 2> rho{Eigen::ArrayXd(nx), Eigen::ArrayXd(nx)};
  std::array<Eigen::ArrayXd, 2> u{Eigen::ArrayXd(nx), Eigen::ArrayXd(nx)};
  for (int i = 0; i < nx; ++i) {
    const double x = (i + 0.5) * dx;
    f.alpha(i) = init.alpha_at(x);
    const double p = init.pressure_at(x);
    for (int k = 0; k < 2; ++k) {
      rho[k](i) = density_from_pressure(cfg.laws[k], p);
      u[k](i) = init.velocity_at(k, x);
    }
  }
  for (int k = 0; k < 2; ++k) {
    const Eigen::ArrayXd H = layer_thickness(f.alpha, k);
    const Eigen::ArrayXd m = H * rho[k];
    f.layer[k].mass = (m.transpose()).replicate(ns, 1);
    f.layer[k].xmom = ((m * u[k]).transpose()).replicate(ns, 1);
  }
  if (!init.balanced_w) return f;

  // Column mass rates and the closure-consistent alpha_t.
  std::array<Eigen::ArrayXd, 2> mt, rho_t, flux_x;
  const Eigen::ArrayXd a1 = f.alpha, a2 = 1.0 - f.alpha;
  for (int k = 0; k < 2; ++k) {
    const Eigen::ArrayXd H = k == 0 ? a1 : a2;
    mt[k] = -central_x(H * rho[k] * u[k], dx);
    flux_x[k] = central_x(rho[k] * u[k], dx);
  }
  Eigen::ArrayXd at(nx);
  for (int i = 0; i < nx; ++i) {
    const double c1 = pressure_derivative(cfg.laws[0], rho[0](i));
    const double c2 = pressure_derivative(cfg.laws[1], rho[1](i));
    const double num = c1 * mt[0](i) / a1(i) - c2 * mt[1](i) / a2(i);
    const double den = c1 * rho[0](i) / a1(i) + c2 * rho[1](i) / a2(i);
    at(i) = num / den;
  }
  rho_t[0] = (mt[0] - rho[0] * at) / a1;
  rho_t[1] = (mt[1] + rho[1] * at) / a2;
  f.vn = at;
  for (int i = 0; i < nx; ++i) {
    const double g1 = (-rho_t[0](i) - flux_x[0](i)) / rho[0](i);
    const double g2 = (rho_t[1](i) + flux_x[1](i)) / rho[1](i);
    for (int r = 0; r <= ns; ++r) {
      const double s = r * ds;
      f.layer[0].w(r, i) = s * a1(i) * g1;
      f.layer[1].w(r, i) = (1.0 - s) * a2(i) * g2;
    }
  }
  apply_wall_conditions(f, cfg);
  apply_interface_conditions(f, cfg);
  return f;
}

}  // namespace stratavg
