#include "stratavg/macro_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stratavg {

namespace {

constexpr int im(int k) { return k; }
constexpr int iq(int k) { return 2 + k; }
constexpr int ie(int k) { return 4 + k; }

bool has_energy(const MacroModel& m) { return m.variant == ModelVariant::TwoVelocityNsf; }

}  // namespace

std::string to_string(ModelVariant v) {
  switch (v) {
    case ModelVariant::TwoVelocityBarotropic: return "two-velocity-barotropic";
    case ModelVariant::TwoVelocityNsf: return "two-velocity-nsf";
    case ModelVariant::OneVelocity: return "one-velocity";
  }
  return "unknown";
}

ModelVariant variant_from_string(const std::string& name) {
  if (name == "two-velocity-barotropic") return ModelVariant::TwoVelocityBarotropic;
  if (name == "two-velocity-nsf") return ModelVariant::TwoVelocityNsf;
  if (name == "one-velocity") return ModelVariant::OneVelocity;
  throw DomainError("unknown model variant '" + name + "'");
}

SourceParams SourceParams::from_regime(const ScalingRegime& r, double w_pi, bool quadratic) {
  SourceParams p;
  p.kappa_hat = r.kappa_hat;
  p.kappa_i_hat = r.kappa_i_hat;
  p.h_c_hat = r.h_c_hat;
  p.beta_hat = r.beta_hat;
  p.delta_xi = r.delta_xi();
  p.delta_gamma = r.delta_gamma();
  p.w_pi = w_pi;
  p.quadratic_friction = quadratic;
  return p;
}

int MacroModel::num_vars() const {
  switch (variant) {
    case ModelVariant::TwoVelocityBarotropic: return 4;
    case ModelVariant::TwoVelocityNsf: return 6;
    case ModelVariant::OneVelocity: return 3;
  }
  return 0;
}

Conserved conservative_from_primitive(const MacroModel& model, const MacroState& s) {
  Conserved u(model.num_vars());
  const std::array<double, 2> m{s.alpha(0) * s.rho[0], s.alpha(1) * s.rho[1]};
  u(im(0)) = m[0];
  u(im(1)) = m[1];
  if (model.variant == ModelVariant::OneVelocity) {
    u(2) = (m[0] + m[1]) * s.v[0];
    return u;
  }
  for (int k = 0; k < 2; ++k) u(iq(k)) = m[k] * s.v[k];
  if (has_energy(model))
    for (int k = 0; k < 2; ++k) u(ie(k)) = m[k] * (0.5 * s.v[k] * s.v[k] + s.e[k]);
  return u;
}

MacroState primitive_from_conserved(const MacroModel& model, const Eigen::Ref<const Eigen::VectorXd>& u,
                                    double alpha_guess) {
  MacroState s;
  const double m1 = u(im(0));
  const double m2 = u(im(1));
  if (!(m1 > 0) || !(m2 > 0)) throw DomainError("partial masses must be positive");

  if (has_energy(model)) {
    std::array<double, 2> internal{};
    for (int k = 0; k < 2; ++k) {
      const double m = u(im(k));
      s.v[k] = u(iq(k)) / m;
      internal[k] = u(ie(k)) - 0.5 * u(iq(k)) * s.v[k];
    }
    const auto& eos = model.laws.complete;
    const auto r = pressure_equilibrium_alpha(m1, m2, eos[0], eos[1], internal[0], internal[1], model.closure,
                                              alpha_guess);
    s.alpha1 = r.alpha1;
    s.p = {r.p1, r.p2};
    for (int k = 0; k < 2; ++k) {
      const double m = u(im(k));
      s.rho[k] = m / s.alpha(k);
      s.e[k] = internal[k] / m;
      s.E[k] = u(ie(k)) / m;
      s.theta[k] = temperature(eos[k], s.rho[k], s.rho[k] * s.e[k]);
    }
    return s;
  }

  const auto& laws = model.laws.barotropic;
  const auto r = pressure_equilibrium_alpha(m1, m2, laws[0], laws[1], model.closure, alpha_guess);
  s.alpha1 = r.alpha1;
  s.p = {r.p1, r.p2};
  s.rho = {m1 / s.alpha(0), m2 / s.alpha(1)};
  if (model.variant == ModelVariant::OneVelocity) {
    const double v = u(2) / (m1 + m2);
    s.v = {v, v};
  } else {
    s.v = {u(iq(0)) / m1, u(iq(1)) / m2};
  }
  return s;
}

Eigen::VectorXd convective_flux(const MacroModel& model, const MacroState& s) {
  Eigen::VectorXd f(model.num_vars());
  const std::array<double, 2> m{s.alpha(0) * s.rho[0], s.alpha(1) * s.rho[1]};
  if (model.variant == ModelVariant::OneVelocity) {
    const double v = s.v[0];
    f(0) = m[0] * v;
    f(1) = m[1] * v;
    f(2) = (m[0] + m[1]) * v * v + s.alpha(0) * s.p[0] + s.alpha(1) * s.p[1];
    return f;
  }
  for (int k = 0; k < 2; ++k) {
    f(im(k)) = m[k] * s.v[k];
    f(iq(k)) = m[k] * s.v[k] * s.v[k] + s.alpha(k) * s.p[k];
  }
  if (has_energy(model))
    for (int k = 0; k < 2; ++k) f(ie(k)) = (m[k] * s.E[k] + s.alpha(k) * s.p[k]) * s.v[k];
  return f;
}

double max_wave_speed(const MacroModel& model, const MacroState& s) {
  double smax = 0.0;
  for (int k = 0; k < 2; ++k) {
    const double c = has_energy(model) ? sound_speed(model.laws.complete[k], s.rho[k], s.rho[k] * s.e[k])
                                       : sound_speed(model.laws.barotropic[k], s.rho[k]);
    smax = std::max(smax, std::abs(s.v[k]) + c);
  }
  return smax;
}

double interface_pressure(const MacroState& left, const MacroState& right, double w_pi) {
  const double p1 = 0.5 * (left.p[0] + right.p[0]);
  const double p2 = 0.5 * (left.p[1] + right.p[1]);
  return w_pi * p1 + (1.0 - w_pi) * p2;
}

std::array<double, 2> nonconservative_terms(const MacroState& left, const MacroState& right,
                                            const SourceParams& params, double dx) {
  const double pi = interface_pressure(left, right, params.w_pi);
  const double d1 = pi * (right.alpha1 - left.alpha1) / dx;
  return {d1, -d1};
}

Eigen::VectorXd friction_sources(const MacroModel& model, const MacroState& s) {
  const auto& prm = model.params;
  Eigen::VectorXd src = Eigen::VectorXd::Zero(model.num_vars());
  if (model.variant == ModelVariant::OneVelocity) {
    src(2) = -prm.delta_xi * (prm.kappa_hat[0] + prm.kappa_hat[1]) * s.v[0];
    return src;
  }
  const double dv = s.v[0] - s.v[1];
  const double drag = prm.quadratic_friction ? prm.kappa_i_hat * std::abs(dv) * dv : prm.kappa_i_hat * dv;
  const std::array<double, 2> exchange{-drag, drag};
  for (int k = 0; k < 2; ++k) src(iq(k)) = -prm.delta_xi * prm.kappa_hat[k] * s.v[k] + exchange[k];
  if (has_energy(model))
    for (int k = 0; k < 2; ++k)
      src(ie(k)) = -prm.delta_xi * prm.kappa_hat[k] * s.v[k] * s.v[k] + exchange[k] * s.v[k];
  return src;
}

std::array<double, 2> heat_sources(const MacroState& left, const MacroState& center, const MacroState& right,
                                   const SourceParams& params, double dx) {
  std::array<double, 2> out{};
  const double exchange = params.h_c_hat * (center.theta[0] - center.theta[1]);
  for (int k = 0; k < 2; ++k) {
    double diffusion = 0.0;
    if (params.delta_gamma == 1 && params.beta_hat[k] != 0.0) {
      const double a_r = 0.5 * (center.alpha(k) + right.alpha(k));
      const double a_l = 0.5 * (left.alpha(k) + center.alpha(k));
      diffusion = params.beta_hat[k] *
                  (a_r * (right.theta[k] - center.theta[k]) - a_l * (center.theta[k] - left.theta[k])) / (dx * dx);
    }
    out[k] = diffusion + (k == 0 ? -exchange : exchange);
  }
  return out;
}

std::vector<MacroState> MacroGrid::states(const MacroModel& model) const {
  std::vector<MacroState> out;
  out.reserve(static_cast<std::size_t>(size()));
  for (Eigen::Index i = 0; i < size(); ++i)
    out.push_back(primitive_from_conserved(model, U.row(i).transpose(), alpha1.size() == size() ? alpha1(i) : -1.0));
  return out;
}

MacroGrid make_grid(const MacroModel& model, const std::vector<MacroState>& cells, double dx) {
  MacroGrid g;
  g.dx = dx;
  const auto n = static_cast<Eigen::Index>(cells.size());
  g.U.resize(n, model.num_vars());
  g.alpha1.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    g.U.row(i) = conservative_from_primitive(model, cells[static_cast<std::size_t>(i)]).transpose();
    g.alpha1(i) = cells[static_cast<std::size_t>(i)].alpha1;
  }
  return g;
}

namespace {

double max_speed(const MacroModel& model, const std::vector<MacroState>& states) {
  double smax = 0.0;
  for (const auto& s : states) smax = std::max(smax, max_wave_speed(model, s));
  return smax;
}

// Forward-Euler bound of the explicit sources: parabolic heat diffusion and
// monotone relaxation of the temperature and velocity differences.
double source_dt(const MacroModel& model, const std::vector<MacroState>& states, double dx) {
  const auto& prm = model.params;
  double dt = std::numeric_limits<double>::infinity();
  const bool two_velocity = model.variant != ModelVariant::OneVelocity;
  for (const auto& s : states) {
    const std::array<double, 2> m{s.alpha(0) * s.rho[0], s.alpha(1) * s.rho[1]};
    double rate = 0.0;
    if (two_velocity) {
      const double drag = prm.quadratic_friction ? 2.0 * prm.kappa_i_hat * std::abs(s.v[0] - s.v[1]) : prm.kappa_i_hat;
      for (int k = 0; k < 2; ++k) rate = std::max(rate, prm.delta_xi * prm.kappa_hat[k] / m[k] + drag * (1 / m[0] + 1 / m[1]));
    } else {
      rate = prm.delta_xi * (prm.kappa_hat[0] + prm.kappa_hat[1]) / (m[0] + m[1]);
    }
    if (has_energy(model)) {
      const auto& eos = model.laws.complete;
      rate = std::max(rate, prm.h_c_hat * (1 / (m[0] * eos[0].cv) + 1 / (m[1] * eos[1].cv)));
      if (prm.delta_gamma == 1)
        for (int k = 0; k < 2; ++k)
          if (prm.beta_hat[k] > 0) dt = std::min(dt, 0.5 * dx * dx * s.rho[k] * eos[k].cv / prm.beta_hat[k]);
    }
    if (rate > 0) dt = std::min(dt, 1.0 / rate);
  }
  return dt;
}

enum Parts : unsigned { kHyperbolic = 1u, kSources = 2u };

// Semi-discrete right-hand side without the p_i d(alpha)/dt energy term.
Eigen::MatrixXd rhs(const MacroModel& model, const std::vector<MacroState>& st, const Eigen::MatrixXd& U, double dx,
                    unsigned parts) {
  const auto n = static_cast<Eigen::Index>(st.size());
  const int nv = model.num_vars();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, nv);
  const bool two_velocity = model.variant != ModelVariant::OneVelocity;
  const auto at = [&](Eigen::Index i) -> const MacroState& { return st[static_cast<std::size_t>((i + n) % n)]; };

  if (parts & kHyperbolic) {
    std::vector<Eigen::VectorXd> flux(static_cast<std::size_t>(n));
    std::vector<double> speed(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      flux[static_cast<std::size_t>(i)] = convective_flux(model, at(i));
      speed[static_cast<std::size_t>(i)] = max_wave_speed(model, at(i));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index r = (i + 1) % n;
      const auto ii = static_cast<std::size_t>(i);
      const auto rr = static_cast<std::size_t>(r);
      const double a = std::max(speed[ii], speed[rr]);
      const Eigen::VectorXd face = 0.5 * (flux[ii] + flux[rr]) - 0.5 * a * (U.row(r) - U.row(i)).transpose();
      L.row(i) -= face.transpose() / dx;
      L.row(r) += face.transpose() / dx;
      if (two_velocity) {
        const auto nc = nonconservative_terms(at(i), at(r), model.params, dx);
        for (int k = 0; k < 2; ++k) {
          L(i, iq(k)) += 0.5 * nc[static_cast<std::size_t>(k)];
          L(r, iq(k)) += 0.5 * nc[static_cast<std::size_t>(k)];
        }
      }
    }
  }

  if (parts & kSources) {
    for (Eigen::Index i = 0; i < n; ++i) {
      L.row(i) += friction_sources(model, at(i)).transpose();
      if (has_energy(model)) {
        const auto h = heat_sources(at(i - 1), at(i), at(i + 1), model.params, dx);
        L(i, ie(0)) += h[0];
        L(i, ie(1)) += h[1];
      }
    }
  }
  return L;
}

void check_positivity(const MacroGrid& g, double floor) {
  for (Eigen::Index i = 0; i < g.size(); ++i)
    for (int k = 0; k < 2; ++k)
      if (!(g.U(i, im(k)) > floor))
        throw PositivityError("partial mass of phase " + std::to_string(k + 1) + " fell below the floor in cell " +
                                  std::to_string(i),
                              static_cast<std::size_t>(i));
}

MacroGrid close_grid(const MacroModel& model, MacroGrid g, std::vector<MacroState>* out = nullptr) {
  std::vector<MacroState> st;
  st.reserve(static_cast<std::size_t>(g.size()));
  if (g.alpha1.size() != g.size()) g.alpha1 = Eigen::VectorXd::Constant(g.size(), -1.0);
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    st.push_back(primitive_from_conserved(model, g.U.row(i).transpose(), g.alpha1(i)));
    g.alpha1(i) = st.back().alpha1;
  }
  if (out) *out = std::move(st);
  return g;
}

// Forward-Euler sub-operator. In the energy variant the p_i d(alpha)/dt term is
// taken from a predicted closure and the cell is re-closed afterwards.
MacroGrid euler_update(const MacroModel& model, const MacroGrid& g, const std::vector<MacroState>& st, double dt,
                       unsigned parts, double floor) {
  MacroGrid next = g;
  next.U += dt * rhs(model, st, g.U, g.dx, parts);
  check_positivity(next, floor);
  if (has_energy(model)) {
    std::vector<MacroState> pred;
    next = close_grid(model, std::move(next), &pred);
    for (Eigen::Index i = 0; i < next.size(); ++i) {
      const auto& old = st[static_cast<std::size_t>(i)];
      const double pi = model.params.w_pi * old.p[0] + (1.0 - model.params.w_pi) * old.p[1];
      const double work = pi * (pred[static_cast<std::size_t>(i)].alpha1 - old.alpha1);
      next.U(i, ie(0)) -= work;
      next.U(i, ie(1)) += work;
    }
  }
  return close_grid(model, std::move(next));
}

MacroGrid advance(const MacroModel& model, const MacroGrid& grid, double dt, const StepOptions& opt) {
  std::vector<MacroState> st;
  MacroGrid g = close_grid(model, grid, &st);
  const double allowed = opt.cfl * std::min(g.dx / max_speed(model, st), source_dt(model, st, g.dx));
  if (dt > allowed * (1.0 + 1e-12))
    throw StepRejected("time step " + std::to_string(dt) + " exceeds the stable bound " + std::to_string(allowed),
                       allowed);

  const auto stage = [&](const MacroGrid& from, const std::vector<MacroState>& s, double h, unsigned parts) {
    if (opt.integrator == Integrator::ForwardEuler) return euler_update(model, from, s, h, parts, opt.positivity_floor);
    MacroGrid u1 = euler_update(model, from, s, h, parts, opt.positivity_floor);
    std::vector<MacroState> s1;
    u1 = close_grid(model, std::move(u1), &s1);
    MacroGrid u2 = euler_update(model, u1, s1, h, parts, opt.positivity_floor);
    u2.U = 0.5 * (from.U + u2.U);
    return close_grid(model, std::move(u2));
  };

  if (opt.splitting == SourceSplitting::Unsplit) return stage(g, st, dt, kHyperbolic | kSources);

  MacroGrid half = stage(g, st, 0.5 * dt, kSources);
  half = close_grid(model, std::move(half), &st);
  MacroGrid hyp = stage(half, st, dt, kHyperbolic);
  hyp = close_grid(model, std::move(hyp), &st);
  return stage(hyp, st, 0.5 * dt, kSources);
}

}  // namespace

double admissible_dt(const MacroModel& model, const MacroGrid& grid, double cfl) {
  const auto st = grid.states(model);
  return cfl * std::min(grid.dx / max_speed(model, st), source_dt(model, st, grid.dx));
}

MacroGrid hyperbolic_step(const MacroModel& model, const MacroGrid& grid, double dt, const StepOptions& opt) {
  if (model.variant == ModelVariant::OneVelocity)
    throw DomainError("hyperbolic_step expects a two-velocity model; use one_velocity_step");
  return advance(model, grid, dt, opt);
}

MacroGrid one_velocity_step(const MacroModel& model, const MacroGrid& grid, double dt, const StepOptions& opt) {
  if (model.variant != ModelVariant::OneVelocity) throw DomainError("one_velocity_step expects the one-velocity model");
  return advance(model, grid, dt, opt);
}

MacroGrid macro_step(const MacroModel& model, const MacroGrid& grid, double dt, const StepOptions& opt) {
  return advance(model, grid, dt, opt);
}

MacroGrid macro_run(const MacroModel& model, MacroGrid grid, double t_end, const StepOptions& opt) {
  double t = 0.0;
  while (t < t_end) {
    double dt = admissible_dt(model, grid, opt.cfl);
    if (t + dt >= t_end) dt = t_end - t;
    grid = advance(model, grid, dt, opt);
    t = (dt == t_end - t) ? t_end : t + dt;
  }
  return grid;
}

}  // namespace stratavg
