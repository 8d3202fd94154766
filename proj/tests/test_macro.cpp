#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "stratavg/macro_model.hpp"

using namespace stratavg;
using namespace testing;

namespace {

MacroGrid run_steps(const MacroModel& model, MacroGrid g, int steps, const StepOptions& opt = {}) {
  for (int n = 0; n < steps; ++n) g = macro_step(model, g, admissible_dt(model, g, opt.cfl), opt);
  return g;
}

// exp(M t) by scaling and squaring of a Taylor series.
Eigen::Matrix2d expm(const Eigen::Matrix2d& M) {
  int squarings = 0;
  double scale = 1.0;
  while (M.norm() * scale > 0.1) {
    scale *= 0.5;
    ++squarings;
  }
  const Eigen::Matrix2d A = M * scale;
  Eigen::Matrix2d term = Eigen::Matrix2d::Identity(), sum = term;
  for (int k = 1; k < 20; ++k) {
    term = term * A / k;
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

}  // namespace

TEST_CASE("conserved and primitive variables") {
  const MacroModel sym = symmetric_pair();
  Eigen::Vector4d u(1.0, 1.0, 0.0, 0.0);
  const MacroState s = primitive_from_conserved(sym, u);
  CHECK(s.alpha1 == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(s.v[0] == 0.0);
  CHECK(s.v[1] == 0.0);

  std::mt19937_64 rng(3);
  for (const auto& model : {gamma_pair(), stiffened_pair(), gamma_pair(ModelVariant::TwoVelocityNsf),
                            stiffened_pair(ModelVariant::TwoVelocityNsf), gamma_pair(ModelVariant::OneVelocity)}) {
    for (int i = 0; i < 20; ++i) {
      const MacroState a = random_state(model, rng);
      const Eigen::VectorXd U = conservative_from_primitive(model, a);
      const MacroState b = primitive_from_conserved(model, U);
      CHECK(std::abs(b.alpha1 - a.alpha1) <= 1e-12 * a.alpha1);
      for (int k = 0; k < 2; ++k) {
        CHECK(std::abs(b.rho[k] - a.rho[k]) <= 1e-12 * a.rho[k]);
        CHECK(std::abs(b.v[k] - a.v[k]) <= 1e-12 * std::max(1.0, std::abs(a.v[k])));
      }
      CHECK((conservative_from_primitive(model, b) - U).norm() <= 1e-12 * U.norm());
    }
  }

  const MacroModel nsf = gamma_pair(ModelVariant::TwoVelocityNsf);
  const MacroState rest = equilibrium_state(nsf, 0.4, 1.0, 0.0, 0.0, 1.0, 1.3);
  const MacroState back = primitive_from_conserved(nsf, conservative_from_primitive(nsf, rest));
  CHECK(back.E[0] == back.e[0]);
  CHECK(back.E[1] == back.e[1]);

  CHECK_THROWS_AS(primitive_from_conserved(gamma_pair(), Eigen::Vector4d(-1.0, 1.0, 0.0, 0.0)), DomainError);
}

TEST_CASE("convective flux") {
  const MacroModel model = gamma_pair();
  const MacroState rest = equilibrium_state(model, 0.3, 1.2, 0.0, 0.0);
  const Eigen::VectorXd f = convective_flux(model, rest);
  CHECK(f(0) == 0.0);
  CHECK(f(1) == 0.0);
  CHECK(f(2) == doctest::Approx(0.3 * 1.2).epsilon(1e-14));
  CHECK(f(3) == doctest::Approx(0.7 * 1.2).epsilon(1e-14));

  const MacroState moving = equilibrium_state(model, 0.3, 1.2, 0.4, 0.4);
  const Eigen::VectorXd g = convective_flux(model, moving);
  CHECK(g(0) == doctest::Approx(0.3 * moving.rho[0] * 0.4).epsilon(1e-14));
  CHECK(g(1) == doctest::Approx(0.7 * moving.rho[1] * 0.4).epsilon(1e-14));

  std::mt19937_64 rng(11);
  const MacroModel nsf = stiffened_pair(ModelVariant::TwoVelocityNsf);
  for (int i = 0; i < 10; ++i) {
    const MacroState s = random_state(nsf, rng);
    const Eigen::VectorXd h = convective_flux(nsf, s);
    for (int k = 0; k < 2; ++k) {
      const double a = k == 0 ? s.alpha1 : 1 - s.alpha1;
      const double m = a * s.rho[k], v = s.v[k];
      const double E = s.e[k] + v * v / 2;
      CHECK(h(k) == doctest::Approx(m * v).epsilon(1e-14));
      CHECK(h(2 + k) == doctest::Approx(m * v * v + a * s.p[k]).epsilon(1e-14));
      CHECK(h(4 + k) == doctest::Approx(v * (m * E + a * s.p[k])).epsilon(1e-13));
    }
  }
}

TEST_CASE("nonconservative face terms") {
  const MacroModel model = gamma_pair();
  SourceParams prm;
  const MacroState a = equilibrium_state(model, 0.4, 1.0, 0.0, 0.0);
  auto t = nonconservative_terms(a, a, prm, 0.01);
  CHECK(t[0] == 0.0);
  CHECK(t[1] == 0.0);

  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    prm.w_pi = std::uniform_real_distribution<double>(0, 1)(rng);
    const auto l = random_state(model, rng), r = random_state(model, rng);
    t = nonconservative_terms(l, r, prm, 0.013);
    CHECK(t[0] + t[1] == 0.0);
  }

  const double slope = 0.3, dx = 0.01;
  const MacroState l = equilibrium_state(model, 0.4, 1.5, 0, 0);
  const MacroState r = equilibrium_state(model, 0.4 + slope * dx, 1.5, 0, 0);
  t = nonconservative_terms(l, r, prm, dx);
  CHECK(std::abs(t[0] - 1.5 * slope) <= 1e-12);
}

TEST_CASE("friction sources") {
  MacroModel model = gamma_pair(ModelVariant::TwoVelocityNsf);
  model.params.kappa_hat = {0.0, 0.0};
  model.params.kappa_i_hat = 1.0;

  const MacroState same = equilibrium_state(model, 0.5, 1.0, 0.3, 0.3);
  Eigen::VectorXd src = friction_sources(model, same);
  CHECK(src.norm() == 0.0);

  const MacroState slip = equilibrium_state(model, 0.5, 1.0, 1.0, 0.0);
  src = friction_sources(model, slip);
  CHECK(src(2) == -1.0);
  CHECK(src(3) == 1.0);
  CHECK(src(4) == -1.0);
  CHECK(src(5) == 0.0);
  CHECK(src(4) + src(5) == -1.0);

  model.params.quadratic_friction = true;
  model.params.kappa_hat = {0.2, 0.3};
  const MacroState fast = equilibrium_state(model, 0.5, 1.0, 0.7, -0.4);
  src = friction_sources(model, fast);
  const double wall = -0.2 * 0.7 - 0.3 * -0.4;
  CHECK(src(2) + src(3) == doctest::Approx(wall).epsilon(1e-14));
  CHECK(src(2) < 0.0);
  CHECK(src(4) + src(5) <= 0.0);
}

TEST_CASE("heat sources") {
  const MacroModel model = gamma_pair(ModelVariant::TwoVelocityNsf);
  SourceParams prm;
  prm.h_c_hat = 1.0;
  prm.beta_hat = {0.3, 0.2};
  const MacroState s = equilibrium_state(model, 0.5, 1.0, 0, 0, 1.1, 1.1);
  auto h = heat_sources(s, s, s, prm, 0.1);
  CHECK(std::abs(h[0]) <= 1e-14);
  CHECK(std::abs(h[1]) <= 1e-14);

  prm.beta_hat = {0.0, 0.0};
  const MacroState jump = equilibrium_state(model, 0.5, 1.0, 0, 0, 2.0, 1.0);
  h = heat_sources(jump, jump, jump, prm, 0.1);
  CHECK(h[0] == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(h[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(h[0] + h[1] == 0.0);

  // Periodic profile of theta at uniform alpha: the diffusion telescopes.
  prm.h_c_hat = 0.0;
  prm.beta_hat = {0.3, 0.2};
  const int n = 16;
  std::vector<MacroState> cells;
  for (int i = 0; i < n; ++i) {
    const double x = (i + 0.5) / n;
    cells.push_back(equilibrium_state(model, 0.5, 1.0, 0, 0, 1 + 0.1 * x * (1 - x), 1 + 0.2 * std::sin(6.28 * x)));
  }
  std::array<double, 2> total{};
  for (int i = 0; i < n; ++i) {
    const auto r = heat_sources(cells[(i + n - 1) % n], cells[i], cells[(i + 1) % n], prm, 1.0 / n);
    total[0] += r[0];
    total[1] += r[1];
  }
  CHECK(std::abs(total[0]) <= 1e-12);
  CHECK(std::abs(total[1]) <= 1e-12);
}

TEST_CASE("rest state is a fixed point") {
  for (const auto& model : {gamma_pair(), stiffened_pair(ModelVariant::TwoVelocityNsf),
                            gamma_pair(ModelVariant::OneVelocity)}) {
    const MacroGrid g = uniform_grid(model, equilibrium_state(model, 0.35, 1.1, 0, 0, 1, 1), 32);
    const MacroGrid h = run_steps(model, g, 20);
    CHECK((h.U - g.U).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("phase mass and momentum conservation") {
  MacroModel model = gamma_pair();
  model.params.kappa_hat = {0.0, 0.0};
  model.params.kappa_i_hat = 2.0;
  const MacroGrid g = smooth_grid(model, 128);
  const MacroGrid h = run_steps(model, g, 100);
  for (int k = 0; k < 2; ++k)
    CHECK(std::abs(column_sum(h, k) - column_sum(g, k)) <= 1e-13 * column_sum(g, k));
  const double q0 = column_sum(g, 2) + column_sum(g, 3);
  const double q1 = column_sum(h, 2) + column_sum(h, 3);
  CHECK(std::abs(q1 - q0) <= 1e-12 * (std::abs(column_sum(g, 2)) + std::abs(column_sum(g, 3))));

  model.params.quadratic_friction = true;
  StepOptions rk;
  rk.integrator = Integrator::SspRk2;
  rk.splitting = SourceSplitting::Strang;
  const MacroGrid hq = run_steps(model, g, 100, rk);
  const double qq = column_sum(hq, 2) + column_sum(hq, 3);
  CHECK(std::abs(qq - q0) <= 1e-12 * (std::abs(column_sum(g, 2)) + std::abs(column_sum(g, 3))));
}

TEST_CASE("one-velocity conservation") {
  MacroModel model = gamma_pair(ModelVariant::OneVelocity);
  model.params.kappa_hat = {0.0, 0.0};
  const MacroGrid g = smooth_grid(model, 128);
  const MacroGrid h = run_steps(model, g, 100);
  for (int j = 0; j < 3; ++j)
    CHECK(std::abs(column_sum(h, j) - column_sum(g, j)) <= 1e-12 * std::abs(column_sum(g, 0)));
}

TEST_CASE("one-velocity acoustic pulse travels at the mixture sound speed") {
  const MacroModel model = gamma_pair(ModelVariant::OneVelocity);
  const int n = 1024;
  std::vector<MacroState> cells;
  for (int i = 0; i < n; ++i) {
    const double x = (i + 0.5) / n;
    cells.push_back(equilibrium_state(model, 0.5, 1.0 + 1e-4 * std::exp(-std::pow((x - 0.5) / 0.02, 2)), 0, 0));
  }
  MacroGrid g = make_grid(model, cells, 1.0 / n);
  const double t_end = 0.2;
  g = macro_run(model, g, t_end);
  const auto st = g.states(model);
  double w = 0, wx = 0;
  for (int i = n / 2; i < n; ++i) {
    const double d = st[static_cast<std::size_t>(i)].p[0] - 1.0;
    w += d;
    wx += d * ((i + 0.5) / n - 0.5);
  }
  const double c = wood_sound_speed(model, equilibrium_state(model, 0.5, 1.0, 0, 0));
  CHECK(std::abs(wx / w / t_end - c) <= 0.05 * c);
}

TEST_CASE("uniform friction relaxation matches the linear ODE") {
  MacroModel model = gamma_pair();
  model.params.kappa_hat = {0.4, 0.1};
  model.params.kappa_i_hat = 1.0;
  const MacroState s0 = equilibrium_state(model, 0.4, 1.0, 0.3, -0.2);
  const double m1 = s0.alpha1 * s0.rho[0], m2 = (1 - s0.alpha1) * s0.rho[1];
  Eigen::Matrix2d M;
  M << -(0.4 + 1.0) / m1, 1.0 / m2, 1.0 / m1, -(0.1 + 1.0) / m2;
  const double t_end = 0.5;
  const Eigen::Vector2d q0(m1 * 0.3, m2 * -0.2);
  const Eigen::Vector2d exact = expm(M * t_end) * q0;

  double last = 1e300;
  for (int steps : {400, 800, 1600, 3200}) {
    MacroGrid g = uniform_grid(model, s0, 4);
    StepOptions opt;
    opt.integrator = Integrator::SspRk2;
    for (int n = 0; n < steps; ++n) g = macro_step(model, g, t_end / steps, opt);
    const Eigen::Vector2d q(g.U(0, 2), g.U(0, 3));
    const double err = (q - exact).norm() / exact.norm();
    CHECK(err < last);
    last = err;
  }
  CHECK(last <= 1e-6);
}

TEST_CASE("closure holds after every step") {
  StepOptions opt;
  for (const auto& model : {gamma_pair(), stiffened_pair(), gamma_pair(ModelVariant::TwoVelocityNsf),
                            stiffened_pair(ModelVariant::TwoVelocityNsf), gamma_pair(ModelVariant::OneVelocity),
                            stiffened_pair(ModelVariant::OneVelocity)}) {
    MacroGrid g = smooth_grid(model, 64);
    double worst = 0;
    for (int n = 0; n < 50; ++n) {
      g = macro_step(model, g, admissible_dt(model, g, opt.cfl), opt);
      worst = std::max(worst, max_pressure_gap(model, g));
    }
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("oversized steps are rejected with the admissible value") {
  const MacroModel model = gamma_pair();
  const MacroGrid g = smooth_grid(model, 64);
  const double dt = admissible_dt(model, g, 0.45);
  try {
    macro_step(model, g, 3 * dt);
    FAIL("expected StepRejected");
  } catch (const StepRejected& e) {
    CHECK(e.admissible_dt() == doctest::Approx(dt).epsilon(1e-12));
  }
}

TEST_CASE("variant names") {
  for (auto v : {ModelVariant::TwoVelocityBarotropic, ModelVariant::TwoVelocityNsf, ModelVariant::OneVelocity})
    CHECK(variant_from_string(to_string(v)) == v);
  CHECK_THROWS_AS(variant_from_string("three-velocity"), DomainError);
}

TEST_CASE("temperature exchange relaxes monotonically and conserves energy") {
  MacroModel model = stiffened_pair(ModelVariant::TwoVelocityNsf);
  model.params.kappa_hat = {0.0, 0.0};
  model.params.kappa_i_hat = 0.0;
  model.params.beta_hat = {0.0, 0.0};
  model.params.h_c_hat = 1.0;
  MacroGrid g = uniform_grid(model, equilibrium_state(model, 0.45, 1.0, 0.1, -0.2, 1.6, 0.8), 8);
  const double energy0 = column_sum(g, 4) + column_sum(g, 5);
  double gap = 0.8;
  for (int n = 0; n < 400; ++n) {
    g = macro_step(model, g, admissible_dt(model, g, 0.45));
    const MacroState s = g.states(model)[0];
    const double next = s.theta[0] - s.theta[1];
    CHECK(next >= 0.0);
    CHECK(next <= gap);
    gap = next;
    CHECK(std::abs(column_sum(g, 4) + column_sum(g, 5) - energy0) <= 1e-11 * energy0);
  }
  CHECK(gap < 0.1);
}

TEST_CASE("NSF phase masses and total energy with diffusion") {
  MacroModel model = gamma_pair(ModelVariant::TwoVelocityNsf);
  model.params.kappa_hat = {0.0, 0.0};
  model.params.kappa_i_hat = 0.0;
  model.params.beta_hat = {0.05, 0.02};
  model.params.h_c_hat = 0.5;
  const MacroGrid g = smooth_grid(model, 64);
  const MacroGrid h = run_steps(model, g, 200);
  for (int k = 0; k < 2; ++k) CHECK(std::abs(column_sum(h, k) - column_sum(g, k)) <= 1e-12 * column_sum(g, k));
  const double e0 = column_sum(g, 4) + column_sum(g, 5);
  CHECK(std::abs(column_sum(h, 4) + column_sum(h, 5) - e0) <= 1e-11 * e0);
}
