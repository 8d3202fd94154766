#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "stratavg/verify.hpp"

using namespace stratavg;

namespace {

StudyConfig tiny_study() {
  StudyConfig cfg;
  cfg.micro.grid = {16, 6};
  cfg.micro.laws = {BarotropicLaw<double>::gamma_law(1, 1.4), BarotropicLaw<double>::gamma_law(1, 2)};
  cfg.eps = {0.2, 0.1, 0.05};
  cfg.t_end = 0.05;
  cfg.spinup = 0.0;
  cfg.snapshot_interval = 0.025;
  cfg.max_refine = 4;
  cfg.initial.pressure_amp = 0.01;
  cfg.initial.velocity_amp = {0.01, -0.01};
  return cfg;
}

}  // namespace

TEST_CASE("order fits of exact power laws") {
  const std::vector<double> eps{0.1, 0.05, 0.025, 0.0125};
  std::vector<double> e1, e2;
  for (double e : eps) {
    e1.push_back(e);
    e2.push_back(3 * e * e);
  }
  const OrderFit a = fit_order(eps, e1);
  CHECK(a.valid);
  CHECK(a.slope == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a.residual <= 1e-12);
  const OrderFit b = fit_order(eps, e2);
  CHECK(b.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(b.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("order fit of noisy synthetic errors") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> noise(-1, 1);
  std::vector<double> eps, err;
  for (int i = 0; i < 8; ++i) {
    eps.push_back(0.2 * std::pow(0.7, i));
    err.push_back(std::pow(eps.back(), 1.5) * (1 + 0.05 * noise(rng)));
  }
  CHECK(std::abs(fit_order(eps, err).slope - 1.5) <= 0.1);
}

TEST_CASE("order fit exclusions") {
  const OrderFit f = fit_order({0.1, 0.05, 0.025, 0.0125}, {0.1, 0.0, 0.025, -1.0});
  CHECK_FALSE(f.valid);
  CHECK(f.used == 2);
  CHECK(f.excluded == std::vector<bool>{false, true, false, true});
  CHECK(std::isnan(f.slope));

  const OrderFit g = fit_order({0.1, 0.05, 0.025}, {1e-3, 1e-15, 2e-4}, 1e-13);
  CHECK_FALSE(g.valid);
  CHECK(g.excluded[1]);
  CHECK_THROWS_AS(fit_order({0.1, 0.05}, {1.0}), DomainError);
}

TEST_CASE("predicted momentum order") {
  ScalingRegime r;
  CHECK(predicted_momentum_order(r) == 1.0);
  r.tau = 0.5;
  CHECK(predicted_momentum_order(r) == 0.5);
  r.tau = 1.5;
  CHECK(predicted_momentum_order(r) == 0.5);
  r.tau = 1.0;
  r.xi = 1.3;
  CHECK(predicted_momentum_order(r) == doctest::Approx(0.3));
}

TEST_CASE("prolongation preserves cell averages") {
  const MacroModel model = testing::gamma_pair();
  const MacroGrid coarse = testing::smooth_grid(model, 16);
  for (int r : {1, 2, 4, 8}) {
    const MacroGrid fine = prolong(coarse, r);
    CHECK(fine.size() == 16 * r);
    CHECK(fine.dx == doctest::Approx(coarse.dx / r));
    CHECK((restrict_average(fine.U, r) - coarse.U).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("self-comparison gives zero errors and undefined slopes") {
  StudyConfig cfg = tiny_study();
  cfg.compare_micro = false;
  const ConvergenceReport rep = run_convergence_study(cfg);
  REQUIRE(rep.runs.size() == 3);
  for (const auto& r : rep.runs) {
    CHECK(r.ok);
    CHECK(r.momentum_l1 == 0.0);
    for (double e : r.l1) CHECK(e == 0.0);
  }
  CHECK_FALSE(rep.momentum_fit.valid);
  bool flagged = false;
  for (const auto& f : rep.flags) flagged = flagged || f == "momentum slope undefined";
  CHECK(flagged);
}

TEST_CASE("rest data stays at round-off") {
  StudyConfig cfg = tiny_study();
  cfg.initial = InitialProfile{};
  const ConvergenceReport rep = run_convergence_study(cfg);
  for (const auto& r : rep.runs) {
    CHECK(r.ok);
    CHECK(r.momentum_l1 <= 1e-13);
    for (double e : r.estimates) CHECK(e <= 1e-12);
  }
  CHECK_FALSE(rep.momentum_fit.valid);
  CHECK_FALSE(pressure_equality_study(rep).fit.valid);
}

TEST_CASE("symmetric phases keep equal averaged pressures") {
  StudyConfig cfg = tiny_study();
  cfg.micro.laws = {BarotropicLaw<double>::gamma_law(1, 1.4), BarotropicLaw<double>::gamma_law(1, 1.4)};
  cfg.initial.velocity_amp = {0.01, 0.01};
  cfg.compare_micro = true;
  cfg.parallel = false;
  const PressureStudy s = pressure_equality_study(run_convergence_study(cfg));
  REQUIRE(s.sup_gap.size() == 3);
  for (double g : s.sup_gap) CHECK(g <= 1e-12);
}

TEST_CASE("study preconditions") {
  StudyConfig cfg = tiny_study();
  cfg.eps = {0.1, 0.05};
  CHECK_THROWS_AS(run_convergence_study(cfg), DomainError);
  cfg.eps = {0.1, 0.2, 0.05};
  CHECK_THROWS_AS(run_convergence_study(cfg), DomainError);
  cfg.eps = {0.1, 0.05, 0.025};
  cfg.variant = ModelVariant::TwoVelocityNsf;
  CHECK_THROWS_AS(run_convergence_study(cfg), DomainError);
}

TEST_CASE("failures are reported per eps") {
  StudyConfig cfg = tiny_study();
  cfg.micro.options.alpha_min = 0.49;
  cfg.initial.alpha_amp = 0.02;
  const ConvergenceReport rep = run_convergence_study(cfg);
  for (const auto& r : rep.runs) {
    CHECK_FALSE(r.ok);
    CHECK(r.failure.rfind("regime-exit", 0) == 0);
  }
  CHECK(rep.flags.size() >= 3);
}

TEST_CASE("scaling checks") {
  ScalingRegime r;
  for (const auto& c : scaling_checks(r)) CHECK(c.satisfied);
  CHECK(scaling_checks(r).size() == 7);
  r.zeta = 1.5;
  const auto w = scaling_warnings(r);
  REQUIRE(w.size() == 2);
  CHECK(w[0] == "scaling inequality violated: xi>=zeta");
  CHECK(w[1] == "scaling inequality violated: zeta<=1");
}
