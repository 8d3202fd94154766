#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "stratavg/hyperbolicity.hpp"
#include "stratavg/initial.hpp"
#include "stratavg/macro_model.hpp"

namespace testing {

using namespace stratavg;

inline MacroModel gamma_pair(ModelVariant v = ModelVariant::TwoVelocityBarotropic) {
  MacroModel m;
  m.variant = v;
  m.laws.barotropic = {BarotropicLaw<double>::gamma_law(1, 1.4), BarotropicLaw<double>::gamma_law(1, 2)};
  m.laws.complete = {CompleteEos<double>::ideal(1.4, 1.0), CompleteEos<double>::ideal(1.67, 0.6)};
  return m;
}

inline MacroModel stiffened_pair(ModelVariant v = ModelVariant::TwoVelocityBarotropic) {
  MacroModel m;
  m.variant = v;
  m.laws.barotropic = {BarotropicLaw<double>::stiffened(1.0, 1.4, 0.3), BarotropicLaw<double>::stiffened(2.0, 4.0, 1.0)};
  m.laws.complete = {CompleteEos<double>::stiffened(1.4, 1.0, 0.2), CompleteEos<double>::stiffened(4.4, 2.0, 0.6)};
  return m;
}

inline MacroModel symmetric_pair(ModelVariant v = ModelVariant::TwoVelocityBarotropic) {
  MacroModel m;
  m.variant = v;
  m.laws.barotropic = {BarotropicLaw<double>::gamma_law(1, 1.4), BarotropicLaw<double>::gamma_law(1, 1.4)};
  m.laws.complete = {CompleteEos<double>::ideal(1.4, 1.0), CompleteEos<double>::ideal(1.4, 1.0)};
  return m;
}

inline InitialProfile smooth_profile() {
  InitialProfile init;
  init.alpha1 = 0.5;
  init.alpha_amp = 0.05;
  init.pressure_amp = 0.02;
  init.velocity = {0.1, -0.05};
  init.velocity_amp = {0.05, -0.03};
  init.temperature = {1.0, 1.2};
  return init;
}

inline MacroGrid smooth_grid(const MacroModel& model, int nx, const InitialProfile& init = smooth_profile()) {
  return make_grid(model, macro_initial(model, init, nx), 1.0 / nx);
}

inline MacroGrid uniform_grid(const MacroModel& model, const MacroState& s, int nx) {
  return make_grid(model, std::vector<MacroState>(static_cast<std::size_t>(nx), s), 1.0 / nx);
}

inline double column_sum(const MacroGrid& g, int j) { return g.U.col(j).sum() * g.dx; }

inline MacroState random_state(const MacroModel& model, std::mt19937_64& rng, bool equal_velocity = false) {
  std::uniform_real_distribution<double> a(0.1, 0.9), p(0.5, 2.0), v(-0.5, 0.5), th(0.6, 1.6);
  const double alpha = a(rng), pres = p(rng), v1 = v(rng);
  const double v2 = equal_velocity ? v1 : v(rng);
  const double t1 = th(rng), t2 = th(rng);
  return equilibrium_state(model, alpha, pres, v1, v2, t1, t2);
}

inline double max_pressure_gap(const MacroModel& model, const MacroGrid& g) {
  double worst = 0.0;
  for (const auto& s : g.states(model))
    worst = std::max(worst, std::abs(s.p[0] - s.p[1]) / std::max(std::abs(s.p[0]), std::abs(s.p[1])));
  return worst;
}

}  // namespace testing
