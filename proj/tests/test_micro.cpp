#include <doctest.h>

#include <cmath>

#include "stratavg/averaging.hpp"
#include "stratavg/initial.hpp"
#include "stratavg/micro_solver.hpp"

using namespace stratavg;

namespace {

MicroConfig small_config(int nx = 32, int ns = 8, double eps = 0.1) {
  MicroConfig cfg;
  cfg.grid = {nx, ns};
  cfg.regime.eps = eps;
  cfg.laws = {BarotropicLaw<double>::gamma_law(1, 1.4), BarotropicLaw<double>::gamma_law(1, 2)};
  return cfg;
}

double max_abs(const MicroFields& r) {
  double m = std::max(r.alpha.abs().maxCoeff(), r.vn.abs().maxCoeff());
  for (const auto& l : r.layer)
    m = std::max({m, l.mass.abs().maxCoeff(), l.xmom.abs().maxCoeff(), l.w.abs().maxCoeff()});
  return m;
}

double max_diff(const MicroFields& a, const MicroFields& b) {
  double m = std::max((a.alpha - b.alpha).abs().maxCoeff(), (a.vn - b.vn).abs().maxCoeff());
  for (int k = 0; k < 2; ++k)
    m = std::max({m, (a.layer[k].mass - b.layer[k].mass).abs().maxCoeff(),
                  (a.layer[k].xmom - b.layer[k].xmom).abs().maxCoeff(),
                  (a.layer[k].w - b.layer[k].w).abs().maxCoeff()});
  return m;
}

// Column-uniform fields with u_k(z) given per layer; w = vn = 0.
template <typename U1, typename U2>
MicroFields layered(const MicroConfig& cfg, double alpha, U1 u1, U2 u2) {
  InitialProfile init;
  init.alpha1 = alpha;
  MicroFields f = micro_initial(cfg, init);
  for (int k = 0; k < 2; ++k) {
    const Eigen::ArrayXXd z = cell_heights(f, k);
    for (Eigen::Index idx = 0; idx < z.size(); ++idx)
      f.layer[k].xmom(idx) = f.layer[k].mass(idx) * (k == 0 ? u1(z(idx)) : u2(z(idx)));
  }
  return f;
}

}  // namespace

TEST_CASE("sigma derivatives of simple fields") {
  const MicroConfig cfg = small_config(32, 8);
  MicroFields f = micro_initial(cfg, InitialProfile{});
  const SigmaDerivatives dz = sigma_derivatives(cell_heights(f, 0), f.alpha, 0, cfg.grid);
  CHECK((dz.dz - 1.0).abs().maxCoeff() <= 1e-12);
  CHECK(dz.dx.abs().maxCoeff() <= 1e-12);

  InitialProfile wavy;
  wavy.alpha_amp = 0.1;
  f = micro_initial(cfg, wavy);
  for (int k = 0; k < 2; ++k) {
    Eigen::ArrayXXd x(cfg.grid.ns, cfg.grid.nx);
    for (int i = 0; i < cfg.grid.nx; ++i) x.col(i).setConstant((i + 0.5) * cfg.grid.dx());
    const SigmaDerivatives d = sigma_derivatives(x, f.alpha, k, cfg.grid);
    CHECK((d.dx.middleCols(1, cfg.grid.nx - 2) - 1.0).abs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("sigma derivatives converge at second order") {
  const auto error = [](int nx, int ns) {
    MicroConfig cfg = small_config(nx, ns);
    InitialProfile wavy;
    wavy.alpha_amp = 0.1;
    const MicroFields f = micro_initial(cfg, wavy);
    const Eigen::ArrayXXd z = cell_heights(f, 1);
    Eigen::ArrayXXd field(ns, nx), fx(ns, nx), fz(ns, nx);
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ns; ++j) {
        const double x = (i + 0.5) / nx, zz = z(j, i);
        field(j, i) = std::sin(2 * M_PI * x) * std::cos(3 * zz);
        fx(j, i) = 2 * M_PI * std::cos(2 * M_PI * x) * std::cos(3 * zz);
        fz(j, i) = -3 * std::sin(2 * M_PI * x) * std::sin(3 * zz);
      }
    const SigmaDerivatives d = sigma_derivatives(field, f.alpha, 1, cfg.grid);
    return std::max((d.dx - fx).abs().maxCoeff(), (d.dz - fz).abs().maxCoeff());
  };
  const double e1 = error(32, 8), e2 = error(64, 16), e3 = error(128, 32);
  CHECK(std::log2(e1 / e2) > 1.8);
  CHECK(std::log2(e2 / e3) > 1.9);
}

TEST_CASE("thin layers are rejected") {
  const MicroConfig cfg = small_config();
  const MicroFields f = micro_initial(cfg, InitialProfile{});
  Eigen::ArrayXd alpha = f.alpha;
  alpha(3) = 1e-5;
  CHECK_THROWS_AS(sigma_derivatives(f.layer[0].mass, alpha, 0, cfg.grid), GeometryError);
}

TEST_CASE("rest state has zero rates and is a discrete fixed point") {
  const MicroConfig cfg = small_config();
  InitialProfile init;
  init.alpha1 = 0.4;
  const MicroFields f = micro_initial(cfg, init);
  CHECK(max_abs(micro_rhs(f, cfg)) <= 1e-13);
  MicroFields g = f;
  for (int n = 0; n < 10; ++n) {
    const MicroFields next = micro_step(g, cfg, micro_stable_dt(g, cfg));
    CHECK(max_diff(next, g) <= 1e-13);
    g = next;
  }
}

TEST_CASE("uniform horizontal flow leaves a flat interface in place") {
  const MicroConfig cfg = small_config();
  const MicroFields f = layered(cfg, 0.5, [](double) { return 0.3; }, [](double) { return 0.3; });
  const MicroFields r = micro_rhs(f, cfg);
  CHECK(r.alpha.abs().maxCoeff() <= 1e-14);
}

TEST_CASE("wall ghost values") {
  MicroConfig cfg = small_config();
  cfg.regime.kappa_hat = {0.0, 0.0};
  MicroFields f = layered(cfg, 0.5, [](double z) { return 1 + z; }, [](double z) { return 2 - z; });
  auto w = apply_wall_conditions(f, cfg);
  const Eigen::ArrayXXd u1 = velocity(f, 0), u2 = velocity(f, 1);
  CHECK((w[0].ghost - u1.row(0).transpose()).abs().maxCoeff() == 0.0);
  CHECK((w[1].ghost - u2.row(cfg.grid.ns - 1).transpose()).abs().maxCoeff() == 0.0);
  CHECK(w[0].shear.abs().maxCoeff() == 0.0);

  cfg.regime.kappa_hat = {1e8, 1e8};
  w = apply_wall_conditions(f, cfg);
  CHECK(w[0].wall_u.abs().maxCoeff() <= 1e-6 * u1.abs().maxCoeff());
  CHECK(w[1].wall_u.abs().maxCoeff() <= 1e-6 * u2.abs().maxCoeff());

  // Linear profile obeying (mu / eps) u_z = kappa u at z = 0.
  cfg.regime.kappa_hat = {0.5, 0.5};
  const double slope = cfg.regime.kappa(0) * cfg.regime.eps / cfg.regime.mu(0);
  f = layered(cfg, 0.5, [&](double z) { return 1 + slope * z; }, [](double) { return 0.0; });
  w = apply_wall_conditions(f, cfg);
  const double d = 0.5 * 0.5 / cfg.grid.ns;
  CHECK((w[0].wall_u - 1.0).abs().maxCoeff() <= 1e-12);
  CHECK((w[0].ghost - (1.0 - slope * d)).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("interface friction from the ghost solve") {
  MicroConfig cfg = small_config();
  const double alpha = 0.5;
  MicroFields f = layered(cfg, alpha, [](double) { return 0.2; }, [](double) { return 0.2; });
  InterfaceCoupling c = apply_interface_conditions(f, cfg);
  CHECK(c.shear.abs().maxCoeff() <= 1e-14);
  CHECK((c.trace_u1 - 0.2).abs().maxCoeff() <= 1e-14);
  CHECK((c.trace_u2 - 0.2).abs().maxCoeff() <= 1e-14);

  // Equal viscosities: both layers carry the slope (eps kappa_i / mu) J for an interface jump J.
  const double jump = 0.3;
  const double s = cfg.regime.eps * cfg.regime.kappa_i() * jump / cfg.regime.mu(0);
  f = layered(
      cfg, alpha, [&](double z) { return s * (z - alpha); }, [&](double z) { return jump + s * (z - alpha); });
  c = apply_interface_conditions(f, cfg);
  CHECK((c.shear - cfg.regime.kappa_i() * jump).abs().maxCoeff() <= 1e-8);
  CHECK(c.trace_u1.abs().maxCoeff() <= 1e-12);
  CHECK((c.trace_u2 - jump).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("phase masses are conserved") {
  const MicroConfig cfg = small_config(64, 16);
  InitialProfile init;
  init.alpha_amp = 0.05;
  init.pressure_amp = 0.01;
  init.velocity_amp = {0.01, -0.01};
  MicroFields f = micro_initial(cfg, init);
  const double m1 = phase_mass(f, 0), m2 = phase_mass(f, 1);
  for (int n = 0; n < 300; ++n) f = micro_step(f, cfg, micro_stable_dt(f, cfg));
  CHECK(std::abs(phase_mass(f, 0) - m1) <= 1e-12 * m1);
  CHECK(std::abs(phase_mass(f, 1) - m2) <= 1e-12 * m2);
}

TEST_CASE("explicit viscosity matches the implicit path at rest and conserves mass") {
  MicroConfig cfg = small_config(16, 8);
  cfg.options.implicit_viscosity = false;
  InitialProfile init;
  init.alpha_amp = 0.02;
  init.velocity_amp = {0.01, -0.01};
  MicroFields f = micro_initial(cfg, init);
  const double m1 = phase_mass(f, 0);
  micro_run(f, cfg, 0.02);
  CHECK(std::abs(phase_mass(f, 0) - m1) <= 1e-12 * m1);
}

TEST_CASE("oversized micro steps are rejected") {
  const MicroConfig cfg = small_config();
  const MicroFields f = micro_initial(cfg, InitialProfile{});
  const double dt = micro_stable_dt(f, cfg);
  try {
    micro_step(f, cfg, 2 * dt);
    FAIL("expected StepRejected");
  } catch (const StepRejected& e) {
    CHECK(e.admissible_dt() == doctest::Approx(dt));
  }
}

TEST_CASE("leaving the stratification band is reported") {
  MicroConfig cfg = small_config(16, 8);
  cfg.options.alpha_min = 0.45;
  InitialProfile init;
  init.velocity_amp = {0.5, -0.5};
  MicroFields f = micro_initial(cfg, init);
  CHECK_THROWS_AS(micro_run(f, cfg, 1.0), RegimeExitError);

  InitialProfile wide;
  wide.alpha_amp = 0.48;
  cfg.options.alpha_min = 0.05;
  CHECK_THROWS_AS(micro_step(micro_initial(cfg, wide), cfg, 1e-6), RegimeExitError);
}

TEST_CASE("layer slip decays at the averaged friction rate") {
  const auto measured_rate = [](double eps) {
    MicroConfig cfg = small_config(4, 16, eps);
    cfg.regime.kappa_hat = {0.0, 0.0};
    MicroFields f = layered(cfg, 0.5, [](double) { return 0.01; }, [](double) { return -0.01; });
    const auto slip = [&] {
      const AveragedFields a = average_fields(f, cfg);
      return a.velocity[0](0) - a.velocity[1](0);
    };
    micro_run(f, cfg, 0.1);
    const double s1 = slip();
    micro_run(f, cfg, 0.3);
    const double s2 = slip();
    const AveragedFields a = average_fields(f, cfg);
    const double predicted = cfg.regime.kappa_i_hat * (1 / a.mass[0](0) + 1 / a.mass[1](0));
    return std::abs(std::log(s1 / s2) / 0.2 - predicted) / predicted;
  };
  const double e1 = measured_rate(0.1), e2 = measured_rate(0.05), e3 = measured_rate(0.025);
  CHECK(e2 < 0.7 * e1);
  CHECK(e3 < 0.7 * e2);
}
