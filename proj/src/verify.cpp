#include "stratavg/verify.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "stratavg/averaging.hpp"
#include "stratavg/errors.hpp"

namespace stratavg {

namespace {

constexpr double kRoundoffFloor = 1e-13;

std::vector<std::string> variable_names(ModelVariant v) {
  if (v == ModelVariant::OneVelocity) return {"m1", "m2", "q"};
  return {"m1", "m2", "q1", "q2"};
}

std::vector<int> momentum_columns(ModelVariant v) {
  if (v == ModelVariant::OneVelocity) return {2};
  return {2, 3};
}

double l1_norm(const Eigen::MatrixXd& diff, const std::vector<int>& cols, double dx) {
  double s = 0.0;
  for (int c : cols) s += diff.col(c).cwiseAbs().sum() * dx;
  return s;
}

MacroModel macro_model_for(const StudyConfig& cfg, const ScalingRegime& regime) {
  MacroModel m;
  m.variant = cfg.variant;
  m.laws.barotropic = cfg.micro.laws;
  m.params = SourceParams::from_regime(regime, cfg.w_pi, cfg.quadratic_friction);
  return m;
}

EpsilonRun run_one(const StudyConfig& cfg, double eps) {
  EpsilonRun run;
  run.eps = eps;
  MicroConfig mc = cfg.micro;
  mc.regime.eps = eps;
  const MacroModel model = macro_model_for(cfg, mc.regime);
  const std::vector<int> mom = momentum_columns(cfg.variant);
  const int nx = mc.grid.nx;
  const double dx = mc.grid.dx();
  try {
    MicroFields f = micro_initial(mc, cfg.initial);
    if (cfg.spinup > 0) run.micro_steps += micro_run(f, mc, cfg.spinup);
    f.time = 0.0;
    const MacroGrid initial = project_to_macro(model, f);

    Eigen::MatrixXd reference;
    if (cfg.compare_micro) {
      run.estimates = estimate_diagnostics(f, mc).sup();
      const int snaps = std::max(1, static_cast<int>(std::lround(cfg.t_end / cfg.snapshot_interval)));
      for (int n = 1; n <= snaps; ++n) {
        run.micro_steps += micro_run(f, mc, cfg.t_end * n / snaps);
        const auto d = estimate_diagnostics(f, mc).sup();
        for (int q = 0; q < 8; ++q) run.estimates[q] = std::max(run.estimates[q], d[q]);
      }
      reference = project_to_macro(model, f).U;
    }

    Eigen::MatrixXd previous;
    Eigen::MatrixXd best;
    for (int r = 1; r <= cfg.max_refine; r *= 2) {
      const MacroGrid g = macro_run(model, prolong(initial, r), cfg.t_end, cfg.macro_step);
      const Eigen::MatrixXd R = restrict_average(g.U, r);
      if (!cfg.compare_micro) {
        reference = R;
        best = R;
        run.macro_cells = nx * r;
        run.subordinated = true;
        break;
      }
      best = R;
      run.macro_cells = nx * r;
      if (previous.size() > 0) {
        run.macro_estimate = l1_norm(R - previous, mom, dx);
        const double gap = l1_norm(reference - R, mom, dx);
        if (run.macro_estimate <= cfg.subordination * gap) {
          run.subordinated = true;
          break;
        }
      }
      previous = R;
    }

    const Eigen::MatrixXd diff = reference - best;
    for (Eigen::Index c = 0; c < diff.cols(); ++c) {
      run.l1.push_back(diff.col(c).cwiseAbs().sum() * dx);
      run.linf.push_back(diff.col(c).cwiseAbs().maxCoeff());
    }
    run.momentum_l1 = l1_norm(diff, mom, dx);
  } catch (const Error& e) {
    run.ok = false;
    run.failure = std::string(e.kind()) + ": " + e.what();
  }
  return run;
}

bool decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

}  // namespace

OrderFit fit_order(const std::vector<double>& eps, const std::vector<double>& errors, double floor) {
  if (eps.size() != errors.size()) throw DomainError("fit_order: eps and errors differ in length");
  OrderFit fit;
  fit.excluded.assign(eps.size(), false);
  std::vector<double> x, y;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(errors[i] > floor) || !std::isfinite(errors[i]) || !(eps[i] > 0)) {
      fit.excluded[i] = true;
      continue;
    }
    x.push_back(std::log(eps[i]));
    y.push_back(std::log(errors[i]));
  }
  fit.used = static_cast<int>(x.size());
  if (fit.used < 3) {
    fit.slope = fit.intercept = fit.residual = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  Eigen::MatrixXd A(fit.used, 2);
  Eigen::VectorXd b(fit.used);
  for (int i = 0; i < fit.used; ++i) {
    A(i, 0) = x[i];
    A(i, 1) = 1.0;
    b(i) = y[i];
  }
  const Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
  fit.slope = c(0);
  fit.intercept = c(1);
  fit.residual = std::sqrt((A * c - b).squaredNorm() / fit.used);
  fit.valid = true;
  return fit;
}

double predicted_momentum_order(const ScalingRegime& r) {
  double p = std::min(r.tau, 2.0 - r.tau);
  if (r.xi > 1.0) p = std::min(p, r.xi - 1.0);
  return p;
}

MacroGrid prolong(const MacroGrid& coarse, int factor) {
  if (factor == 1) return coarse;
  const Eigen::Index n = coarse.size();
  MacroGrid fine;
  fine.dx = coarse.dx / factor;
  fine.U.resize(n * factor, coarse.U.cols());
  fine.alpha1.resize(n * factor);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index ip = (i + 1) % n, im = (i + n - 1) % n;
    const Eigen::RowVectorXd slope = 0.5 * (coarse.U.row(ip) - coarse.U.row(im));
    const double aslope = coarse.alpha1.size() == n ? 0.5 * (coarse.alpha1(ip) - coarse.alpha1(im)) : 0.0;
    for (int j = 0; j < factor; ++j) {
      const double offset = (j + 0.5) / factor - 0.5;
      fine.U.row(i * factor + j) = coarse.U.row(i) + offset * slope;
      fine.alpha1(i * factor + j) = coarse.alpha1.size() == n ? coarse.alpha1(i) + offset * aslope : -1.0;
    }
  }
  return fine;
}

Eigen::MatrixXd restrict_average(const Eigen::MatrixXd& fine, int factor) {
  if (factor == 1) return fine;
  Eigen::MatrixXd out(fine.rows() / factor, fine.cols());
  for (Eigen::Index i = 0; i < out.rows(); ++i) out.row(i) = fine.middleRows(i * factor, factor).colwise().mean();
  return out;
}

std::vector<double> ConvergenceReport::eps() const {
  std::vector<double> e;
  for (const auto& r : runs) e.push_back(r.eps);
  return e;
}

ConvergenceReport run_convergence_study(const StudyConfig& cfg) {
  if (cfg.eps.size() < 3) throw DomainError("a convergence study needs at least 3 eps values");
  if (!decreasing(cfg.eps)) throw DomainError("the eps list must be strictly decreasing");
  if (cfg.variant == ModelVariant::TwoVelocityNsf)
    throw DomainError("convergence studies compare against the barotropic micro solver");

  ConvergenceReport rep;
  rep.regime = cfg.micro.regime;
  rep.variant = cfg.variant;
  rep.variables = variable_names(cfg.variant);
  rep.checks = scaling_checks(cfg.micro.regime);
  for (const auto& c : rep.checks)
    if (!c.satisfied) rep.flags.push_back("scaling inequality violated: " + c.inequality);

  if (cfg.parallel) {
    std::vector<std::future<EpsilonRun>> jobs;
    for (double e : cfg.eps) jobs.push_back(std::async(std::launch::async, run_one, std::cref(cfg), e));
    for (auto& j : jobs) rep.runs.push_back(j.get());
  } else {
    for (double e : cfg.eps) rep.runs.push_back(run_one(cfg, e));
  }

  std::vector<double> eps;
  for (const auto& r : rep.runs) {
    if (!r.ok) {
      rep.flags.push_back("eps=" + std::to_string(r.eps) + " failed: " + r.failure);
      continue;
    }
    if (!r.subordinated) rep.flags.push_back("eps=" + std::to_string(r.eps) + ": macro grid error not subordinated");
    eps.push_back(r.eps);
  }
  auto column = [&](auto get) {
    std::vector<double> v;
    for (const auto& r : rep.runs)
      if (r.ok) v.push_back(get(r));
    return v;
  };

  for (std::size_t c = 0; c < rep.variables.size(); ++c) {
    rep.l1_fit.push_back(fit_order(eps, column([&](const EpsilonRun& r) { return r.l1[c]; }), kRoundoffFloor));
    rep.linf_fit.push_back(fit_order(eps, column([&](const EpsilonRun& r) { return r.linf[c]; }), kRoundoffFloor));
  }
  const std::vector<double> mom = column([](const EpsilonRun& r) { return r.momentum_l1; });
  rep.momentum_fit = fit_order(eps, mom, kRoundoffFloor);
  if (!rep.momentum_fit.valid) rep.flags.push_back("momentum slope undefined");
  if (!decreasing(mom) && rep.momentum_fit.valid) rep.flags.push_back("non-monotone momentum error");

  const ScalingRegime& g = cfg.micro.regime;
  const double shear = std::min(1.0 + g.xi - g.tau, 2.0 - g.tau);
  rep.predicted_momentum = predicted_momentum_order(g);
  rep.predicted_pressure = g.tau;
  rep.predicted_estimates = {shear, shear, g.tau, g.tau, g.tau, 2 * shear, 2 * shear,
                             std::numeric_limits<double>::quiet_NaN()};
  if (cfg.compare_micro) {
    for (int q = 0; q < 8; ++q) {
      const std::vector<double> v = column([&](const EpsilonRun& r) { return r.estimates[q]; });
      rep.estimate_fit[q] = fit_order(eps, v, kRoundoffFloor);
      if (q < 7 && rep.estimate_fit[q].valid && !decreasing(v))
        rep.flags.push_back(std::string("non-monotone estimate ") + kEstimateNames[q]);
    }
  }
  return rep;
}

PressureStudy pressure_equality_study(const ConvergenceReport& report) {
  PressureStudy s;
  s.predicted = report.regime.tau;
  for (const auto& r : report.runs) {
    if (!r.ok) continue;
    s.eps.push_back(r.eps);
    s.sup_gap.push_back(r.estimates[4]);
  }
  s.fit = fit_order(s.eps, s.sup_gap, kRoundoffFloor);
  s.monotone = decreasing(s.sup_gap);
  return s;
}

}  // namespace stratavg
