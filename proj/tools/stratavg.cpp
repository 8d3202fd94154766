// stratavg: config-driven runs of the averaged models, the micro solver and the
// verification studies. Outputs are CSV files under the output root.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "stratavg/averaging.hpp"
#include "stratavg/config.hpp"
#include "stratavg/csv.hpp"
#include "stratavg/errors.hpp"
#include "stratavg/hyperbolicity.hpp"

using namespace stratavg;

namespace {

enum Exit { kOk = 0, kConfig = 2, kSolver = 3, kRegimeExit = 4 };

std::string regime_string(const ScalingRegime& r) {
  return "eps=" + format_number(r.eps) + " tau=" + format_number(r.tau) + " xi=" + format_number(r.xi) +
         " zeta=" + format_number(r.zeta) + " gamma=" + format_number(r.gamma);
}

class Output {
 public:
  Output(const ExperimentConfig& cfg, std::string command) : cfg_(cfg), command_(std::move(command)) {
    const char* env = std::getenv("STRATAVG_OUTPUT_ROOT");
    root_ = env && *env ? env : cfg.output.root;
  }

  CsvTable table(std::vector<std::string> columns) const {
    CsvTable t(std::move(columns));
    t.meta("stratavg", git_describe());
    t.meta("command", command_);
    t.meta("variant", to_string(cfg_.variant));
    t.meta("regime", regime_string(cfg_.regime));
    return t;
  }

  std::string path(const std::string& suffix) const {
    return (std::filesystem::path(root_) / (cfg_.output.prefix + "_" + suffix)).string();
  }

  void write(const std::string& suffix, const CsvTable& t) const {
    write_file_atomic(path(suffix), t.str());
    std::cout << "wrote " << path(suffix) << "\n";
  }

  void write_config() const { write_file_atomic(path(command_ + "_config.yaml"), emit_config(cfg_)); }

 private:
  const ExperimentConfig& cfg_;
  std::string command_;
  std::string root_;
};

std::vector<double> output_times(double t_end, int snapshots) {
  std::vector<double> t{0.0};
  for (int k = 1; k <= snapshots + 1; ++k) t.push_back(t_end * k / (snapshots + 1));
  return t;
}

void macro_rows(CsvTable& t, const MacroModel& model, const MacroGrid& g, double time) {
  const auto states = g.states(model);
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const MacroState& s = states[i];
    std::vector<double> row{time, (i + 0.5) * g.dx, s.alpha1};
    for (Eigen::Index c = 0; c < g.U.cols(); ++c) row.push_back(g.U(i, c));
    row.insert(row.end(), {s.p[0], s.p[1], s.v[0], s.v[1]});
    t.add_row(row);
  }
}

int macro_run_cmd(const ExperimentConfig& cfg) {
  const Output out(cfg, "macro-run");
  const MacroModel model = cfg.macro_model();
  MacroGrid g = make_grid(model, macro_initial(model, cfg.initial, cfg.grid.nx), 1.0 / cfg.grid.nx);
  std::vector<std::string> cols{"t", "x", "alpha1", "m1", "m2"};
  if (model.variant == ModelVariant::OneVelocity) {
    cols.push_back("q");
  } else {
    cols.insert(cols.end(), {"q1", "q2"});
    if (model.variant == ModelVariant::TwoVelocityNsf) cols.insert(cols.end(), {"En1", "En2"});
  }
  cols.insert(cols.end(), {"p1", "p2", "v1", "v2"});
  CsvTable t = out.table(cols);
  const auto times = output_times(cfg.time.t_end, cfg.time.snapshots);
  macro_rows(t, model, g, 0.0);
  for (std::size_t k = 1; k < times.size(); ++k) {
    g = macro_run(model, g, times[k] - times[k - 1], cfg.step_options());
    macro_rows(t, model, g, times[k]);
  }
  out.write_config();
  out.write("macro.csv", t);
  return kOk;
}

void averaged_rows(CsvTable& t, const MicroFields& f, const MicroConfig& mc, double time) {
  const AveragedFields a = average_fields(f, mc);
  for (int i = 0; i < f.nx(); ++i)
    t.add_row(std::vector<double>{time, (i + 0.5) / f.nx(), a.alpha1(i), a.mass[0](i), a.mass[1](i),
                                  a.momentum[0](i), a.momentum[1](i), a.rho[0](i), a.rho[1](i), a.velocity[0](i),
                                  a.velocity[1](i), a.pressure[0](i), a.pressure[1](i), f.vn(i)});
}

MicroFields prepared_micro(const ExperimentConfig& cfg, const MicroConfig& mc) {
  MicroFields f = micro_initial(mc, cfg.initial);
  if (cfg.micro.spinup > 0) {
    micro_run(f, mc, cfg.micro.spinup);
    f.time = 0.0;
  }
  return f;
}

int micro_run_cmd(const ExperimentConfig& cfg) {
  const Output out(cfg, "micro-run");
  const MicroConfig mc = cfg.micro_config();
  MicroFields f = prepared_micro(cfg, mc);
  CsvTable avg = out.table({"t", "x", "alpha1", "m1", "m2", "q1", "q2", "rho1", "rho2", "v1", "v2", "p1", "p2", "vn"});
  const auto times = output_times(cfg.time.t_end, cfg.time.snapshots);
  averaged_rows(avg, f, mc, 0.0);
  for (std::size_t k = 1; k < times.size(); ++k) {
    micro_run(f, mc, times[k]);
    averaged_rows(avg, f, mc, times[k]);
  }
  CsvTable fields = out.table({"x", "layer", "s", "z", "rho", "u", "w", "p"});
  for (int k = 0; k < 2; ++k) {
    const auto rho = density(f, k);
    const auto u = velocity(f, k);
    const auto p = layer_pressure(f, mc, k);
    const auto z = cell_heights(f, k);
    const auto& w = f.layer[k].w;
    for (int i = 0; i < f.nx(); ++i)
      for (int j = 0; j < f.ns(); ++j)
        fields.add_row(std::vector<double>{(i + 0.5) / f.nx(), double(k + 1), (j + 0.5) / f.ns(), z(j, i),
                                           rho(j, i), u(j, i), 0.5 * (w(j, i) + w(j + 1, i)), p(j, i)});
  }
  out.write_config();
  out.write("micro_averaged.csv", avg);
  out.write("micro_fields.csv", fields);
  return kOk;
}

int diag_cmd(const ExperimentConfig& cfg) {
  const Output out(cfg, "diag");
  const MicroConfig mc = cfg.micro_config();
  for (const auto& w : config_warnings(cfg)) std::cerr << "warning: " << w << "\n";
  MicroFields f = prepared_micro(cfg, mc);
  std::vector<std::string> cols{"t"};
  for (const char* n : kEstimateNames) cols.push_back(n);
  CsvTable t = out.table(cols);
  for (const auto& c : scaling_checks(cfg.regime)) t.meta("check " + c.inequality, c.satisfied ? "ok" : "violated");
  const auto times = output_times(cfg.time.t_end, std::max(cfg.time.snapshots, 9));
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (k > 0) micro_run(f, mc, times[k]);
    std::vector<double> row{times[k]};
    for (double d : estimate_diagnostics(f, mc).sup()) row.push_back(d);
    t.add_row(row);
  }
  out.write_config();
  out.write("diag.csv", t);
  return kOk;
}

std::string fit_cell(const OrderFit& f, double v) { return f.valid ? format_number(v) : "nan"; }

int verify_cmd(const ExperimentConfig& cfg) {
  const Output out(cfg, "verify");
  for (const auto& w : config_warnings(cfg)) std::cerr << "warning: " << w << "\n";
  const ConvergenceReport rep = run_convergence_study(cfg.study_config());

  std::vector<std::string> cols{"eps", "ok", "macro_cells", "subordinated", "macro_estimate", "momentum_l1"};
  for (const auto& v : rep.variables) cols.push_back("l1_" + v);
  for (const auto& v : rep.variables) cols.push_back("linf_" + v);
  for (const char* n : kEstimateNames) cols.push_back(std::string("sup_") + n);
  cols.push_back("failure");
  CsvTable runs = out.table(cols);
  for (const auto& r : rep.runs) {
    std::vector<std::string> row{format_number(r.eps), r.ok ? "1" : "0", std::to_string(r.macro_cells),
                                 r.subordinated ? "1" : "0", format_number(r.macro_estimate),
                                 format_number(r.momentum_l1)};
    for (std::size_t c = 0; c < rep.variables.size(); ++c) row.push_back(r.ok ? format_number(r.l1[c]) : "nan");
    for (std::size_t c = 0; c < rep.variables.size(); ++c) row.push_back(r.ok ? format_number(r.linf[c]) : "nan");
    for (double e : r.estimates) row.push_back(format_number(e));
    row.push_back(r.failure.empty() ? "" : "\"" + r.failure + "\"");
    runs.add_row(row);
  }

  CsvTable fits = out.table({"quantity", "norm", "slope", "intercept", "residual", "used", "predicted"});
  for (const auto& f : rep.flags) fits.meta("flag", f);
  auto add = [&](const std::string& q, const std::string& norm, const OrderFit& f, double predicted) {
    fits.add_row(std::vector<std::string>{q, norm, fit_cell(f, f.slope), fit_cell(f, f.intercept),
                                          fit_cell(f, f.residual), std::to_string(f.used),
                                          format_number(predicted)});
  };
  add("momentum", "l1", rep.momentum_fit, rep.predicted_momentum);
  for (std::size_t c = 0; c < rep.variables.size(); ++c) {
    const bool mom = rep.variables[c][0] == 'q';
    const double pred = mom ? rep.predicted_momentum : std::numeric_limits<double>::quiet_NaN();
    add(rep.variables[c], "l1", rep.l1_fit[c], pred);
    add(rep.variables[c], "linf", rep.linf_fit[c], pred);
  }
  for (int q = 0; q < 8; ++q) add(kEstimateNames[q], "sup", rep.estimate_fit[q], rep.predicted_estimates[q]);

  out.write_config();
  out.write("verify_runs.csv", runs);
  out.write("verify_fits.csv", fits);

  std::cout << "convergence study (" << regime_string(rep.regime) << ")\n";
  for (const auto& r : rep.runs)
    std::cout << "  eps " << format_number(r.eps) << ": " << (r.ok ? "momentum L1 " + format_number(r.momentum_l1) : r.failure)
              << ", macro cells " << r.macro_cells << (r.subordinated ? "" : " (not subordinated)") << "\n";
  std::cout << "  momentum slope " << fit_cell(rep.momentum_fit, rep.momentum_fit.slope) << " (predicted "
            << format_number(rep.predicted_momentum) << ")\n";
  const PressureStudy ps = pressure_equality_study(rep);
  std::cout << "  pressure-equality slope " << fit_cell(ps.fit, ps.fit.slope) << " (predicted "
            << format_number(ps.predicted) << ")\n";
  for (const auto& f : rep.flags) std::cout << "  flag: " << f << "\n";
  return kOk;
}

int eigen_cmd(const ExperimentConfig& cfg) {
  const Output out(cfg, "eigen");
  const MacroModel model = cfg.macro_model();
  const EigenSection& e = cfg.eigen;
  const Eigen::VectorXd alpha = Eigen::Map<const Eigen::VectorXd>(e.alpha1.data(), e.alpha1.size());
  const Eigen::VectorXd dv = Eigen::Map<const Eigen::VectorXd>(e.dv_over_c.data(), e.dv_over_c.size());
  const HyperbolicityMap map = hyperbolicity_map(model, e.pressure, dv, alpha, e.theta1, e.theta2);
  CsvTable t = out.table({"alpha1", "dv_over_c", "max_imag", "max_imag_rel"});
  for (Eigen::Index i = 0; i < alpha.size(); ++i)
    for (Eigen::Index j = 0; j < dv.size(); ++j)
      t.add_row(std::vector<double>{alpha(i), dv(j), map.max_imag(i, j), map.max_imag_rel(i, j)});

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  CsvTable rnd = out.table({"index", "alpha1", "p", "v1", "v2", "max_imag", "norm", "max_imag_rel"});
  int complex_states = 0;
  for (int n = 0; n < e.random_states; ++n) {
    const double a = 0.05 + 0.9 * unit(rng);
    const double p = e.pressure * (0.5 + 1.5 * unit(rng));
    const double v1 = 2 * unit(rng) - 1;
    const double v2 = model.variant == ModelVariant::OneVelocity ? v1 : 2 * unit(rng) - 1;
    const double th1 = e.theta1 * (0.5 + unit(rng)), th2 = e.theta2 * (0.5 + unit(rng));
    const Spectrum s = spectrum(assemble_quasilinear(model, equilibrium_state(model, a, p, v1, v2, th1, th2)));
    const double rel = s.max_imag() / s.matrix_norm;
    if (rel > 1e-8) ++complex_states;
    rnd.add_row(std::vector<double>{double(n), a, p, v1, v2, s.max_imag(), s.matrix_norm, rel});
  }
  out.write_config();
  out.write("eigen_map.csv", t);
  out.write("eigen_random.csv", rnd);
  std::cout << "random states with complex spectrum: " << complex_states << " of " << e.random_states << "\n";
  return kOk;
}

int report(int code, const std::string& kind, const std::string& message, const std::string& where = "") {
  nlohmann::json j{{"status", "error"}, {"exit_code", code}, {"kind", kind}, {"message", message}};
  if (!where.empty()) j["where"] = where;
  std::cerr << j.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thin-layer two-phase averaging: micro solver, averaged models and verification"};
  app.require_subcommand(1);
  std::string path;
  bool print_config = false;
  app.add_flag("--print-config", print_config, "Print the effective config before running");
  const std::vector<std::pair<std::string, std::string>> commands{
      {"macro-run", "Run an averaged model"},
      {"micro-run", "Run the two-layer micro solver"},
      {"verify", "Micro-vs-macro convergence study over eps"},
      {"eigen", "Spectra of the averaged models"},
      {"diag", "Estimate diagnostics of a micro run"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->add_option("config", path)->required();
  CLI11_PARSE(app, argc, argv);
  const std::string cmd = app.get_subcommands().front()->get_name();

  try {
    const ExperimentConfig cfg = load_config(path);
    if (print_config) std::cout << emit_config(cfg);
    if (cmd == "macro-run") return macro_run_cmd(cfg);
    if (cmd == "micro-run") return micro_run_cmd(cfg);
    if (cmd == "verify") return verify_cmd(cfg);
    if (cmd == "eigen") return eigen_cmd(cfg);
    return diag_cmd(cfg);
  } catch (const ConfigError& e) {
    return report(kConfig, e.kind(), e.what(), e.where());
  } catch (const RegimeExitError& e) {
    return report(kRegimeExit, e.kind(), e.what());
  } catch (const Error& e) {
    return report(kSolver, e.kind(), e.what());
  } catch (const std::exception& e) {
    return report(kSolver, "internal", e.what());
  }
}
