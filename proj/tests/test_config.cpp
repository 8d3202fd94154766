#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "stratavg/config.hpp"
#include "stratavg/csv.hpp"

using namespace stratavg;

namespace {

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("minimal config takes the defaults") {
  const ExperimentConfig cfg = parse_config("model: two-velocity-barotropic\n");
  CHECK(cfg == ExperimentConfig{});
  CHECK(parse_config("{}") == ExperimentConfig{});
}

TEST_CASE("effective config echo parses back to an equal config") {
  const std::string text = R"(model: one-velocity
regime: {eps: 0.07, tau: 0.8, xi: 1.2, zeta: 0.9, mu_hat: [0.2, 0.3], kappa_hat: 0.4}
eos:
  phase1: {kind: barotropic, kappa: 2, gamma: 1.3, pi0: 0.1}
  phase2: {kind: barotropic, kappa: 1, gamma: 2.5}
grid: {nx: 96, ns: 12}
time: {cfl: 0.3, t_end: 0.123456789, integrator: ssp-rk2, splitting: strang, snapshots: 3}
initial: {alpha1: 0.45, alpha_amp: 0.01, velocity: [0.1, 0.2], mode: 2}
source: {w_pi: 0.25, quadratic_friction: true}
verify: {eps: [0.2, 0.1, 0.05, 0.025], parallel: false}
eigen: {alpha1: [0.2, 0.8], random_states: 10}
output: {root: somewhere, prefix: p}
seed: 42
)";
  const ExperimentConfig cfg = parse_config(text);
  CHECK(cfg.variant == ModelVariant::OneVelocity);
  CHECK(cfg.regime.mu_hat[1] == 0.3);
  CHECK(cfg.regime.kappa_hat[0] == 0.4);
  CHECK(cfg.regime.kappa_hat[1] == 0.4);
  CHECK(cfg.time.t_end == 0.123456789);
  CHECK(cfg.seed == 42);
  const ExperimentConfig back = parse_config(emit_config(cfg));
  CHECK(back == cfg);
  CHECK(emit_config(back) == emit_config(cfg));
  CHECK(parse_config(emit_config(ExperimentConfig{})) == ExperimentConfig{});
}

TEST_CASE("regime constraints are named") {
  CHECK(contains(config_error("regime: {tau: 2.5}"), "0<τ<2"));
  CHECK(contains(config_error("regime: {xi: 0.5}"), "ξ≥1"));
  CHECK(contains(config_error("regime: {eps: 1.5}"), "0<ε<1"));
  CHECK(contains(config_error("regime: {gamma: 2}"), "0≤γ<2"));
  CHECK(contains(config_error("regime: {mu_hat: 0}"), "μ̂>0"));
  CHECK(contains(config_error("regime: {tau: 2.5}"), "regime.tau"));
}

TEST_CASE("unknown keys and bad values report key and line") {
  const std::string e = config_error("model: one-velocity\ngrid:\n  nx: 64\n  nz: 4\n");
  CHECK(contains(e, "unknown key 'nz'"));
  CHECK(contains(e, "grid.nz"));
  CHECK(contains(e, "line 4"));
  CHECK(contains(config_error("colour: blue"), "unknown key 'colour'"));
  CHECK_FALSE(config_error("model: three-velocity").empty());
  CHECK_FALSE(config_error("grid: {nx: many}").empty());
  CHECK_FALSE(config_error("grid: {nx: -4}").empty());
  CHECK_FALSE(config_error("model: [unclosed").empty());
  CHECK_FALSE(config_error("source: {w_pi: 1.5}").empty());
  CHECK_FALSE(config_error("initial: {alpha1: 1.2}").empty());
  CHECK_FALSE(config_error("verify: {eps: [0.1, 0.2, 0.05]}").empty());
  CHECK_FALSE(config_error("verify: {max_refine: 6}").empty());
  CHECK_FALSE(config_error("eos: {phase1: {kind: complete}}").empty());
  CHECK_FALSE(config_error("model: two-velocity-nsf\neos: {phase1: {kind: barotropic}}").empty());
}

TEST_CASE("NSF defaults to complete equations of state") {
  const ExperimentConfig cfg = parse_config("model: two-velocity-nsf\n");
  CHECK(cfg.eos[0].kind == "complete");
  CHECK(cfg.eos[1].kind == "complete");
  CHECK(cfg.macro_model().variant == ModelVariant::TwoVelocityNsf);
}

TEST_CASE("derived run settings") {
  const ExperimentConfig cfg = parse_config(
      "regime: {eps: 0.05, kappa_i_hat: 2}\ngrid: {nx: 40, ns: 10}\ntime: {integrator: ssp-rk2}\n"
      "micro: {implicit_viscosity: false, cfl: 0.3}\nverify: {eps: [0.1, 0.05, 0.025], max_refine: 8}\n");
  CHECK(cfg.macro_model().params.kappa_i_hat == 2.0);
  CHECK(cfg.step_options().integrator == Integrator::SspRk2);
  const MicroConfig mc = cfg.micro_config();
  CHECK(mc.grid.nx == 40);
  CHECK(mc.grid.ns == 10);
  CHECK(mc.regime.eps == 0.05);
  CHECK_FALSE(mc.options.implicit_viscosity);
  CHECK(mc.options.cfl == 0.3);
  const StudyConfig sc = cfg.study_config();
  CHECK(sc.max_refine == 8);
  CHECK(sc.eps.size() == 3);
}

TEST_CASE("scaling warnings do not reject a config") {
  const ExperimentConfig cfg = parse_config("regime: {zeta: 1.5}");
  CHECK(config_warnings(cfg).size() == 2);
  CHECK(config_warnings(ExperimentConfig{}).empty());
}

TEST_CASE("config files are read from disk") {
  const auto dir = std::filesystem::temp_directory_path() / "stratavg_config_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "a.yaml") << "grid: {nx: 32}\n";
  }
  CHECK(load_config((dir / "a.yaml").string()).grid.nx == 32);
  CHECK_THROWS_AS(load_config((dir / "missing.yaml").string()), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("CSV output is deterministic and atomic") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(2.0) == "2");
  CHECK(format_number(-1.5e-300) == "-1.5000000000000001e-300");

  const auto make = [] {
    CsvTable t({"x", "y"});
    t.meta("variant", "one-velocity");
    t.add_row(std::vector<double>{0.25, 1.0 / 3.0});
    t.add_row(std::vector<std::string>{"a", "b"});
    return t.str();
  };
  CHECK(make() == make());
  CHECK(make() == "# variant: one-velocity\nx,y\n0.25,0.33333333333333331\na,b\n");

  const auto dir = std::filesystem::temp_directory_path() / "stratavg_csv_test";
  std::filesystem::remove_all(dir);
  const auto path = (dir / "nested" / "t.csv").string();
  write_file_atomic(path, make());
  write_file_atomic(path, make());
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == make());
  int files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir / "nested")) ++files;
  CHECK(files == 1);
  std::filesystem::remove_all(dir);
}
