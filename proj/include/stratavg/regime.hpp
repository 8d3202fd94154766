#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace stratavg {

/// Thin-layer parameter, exponents and hatted coefficients tying viscosity,
/// friction and conductivity to powers of epsilon.
struct ScalingRegime {
  double eps = 0.1;
  double tau = 1.0;
  double xi = 1.0;
  double zeta = 1.0;
  double gamma = 0.0;
  std::array<double, 2> mu_hat{0.1, 0.1};
  std::array<double, 2> lambda_hat{0.1, 0.1};
  std::array<double, 2> kappa_hat{0.5, 0.5};
  double kappa_i_hat = 1.0;
  std::array<double, 2> beta_hat{0.0, 0.0};
  double h_c_hat = 0.0;

  double mu(int k) const { return mu_hat[k] * std::pow(eps, tau); }
  double lambda(int k) const { return lambda_hat[k] * std::pow(eps, tau); }
  double kappa(int k) const { return kappa_hat[k] * std::pow(eps, xi); }
  double kappa_i() const { return kappa_i_hat * std::pow(eps, zeta); }
  double beta(int k) const { return beta_hat[k] * std::pow(eps, gamma); }

  int delta_xi() const { return xi == 1.0 ? 1 : 0; }
  int delta_gamma() const { return gamma == 0.0 ? 1 : 0; }

  bool operator==(const ScalingRegime&) const = default;
};

struct ScalingCheck {
  std::string inequality;
  bool satisfied;
};

/// The seven exponent inequalities under which the averaging errors vanish.
inline std::vector<ScalingCheck> scaling_checks(const ScalingRegime& r) {
  return {
      {"zeta+xi>tau", r.zeta + r.xi > r.tau},
      {"1+zeta>tau", 1 + r.zeta > r.tau},
      {"1+xi>tau", 1 + r.xi > r.tau},
      {"2xi>tau", 2 * r.xi > r.tau},
      {"2>tau", 2 > r.tau},
      {"xi>=zeta", r.xi >= r.zeta},
      {"zeta<=1", r.zeta <= 1},
  };
}

inline std::vector<std::string> scaling_warnings(const ScalingRegime& r) {
  std::vector<std::string> out;
  for (const auto& c : scaling_checks(r))
    if (!c.satisfied) out.push_back("scaling inequality violated: " + c.inequality);
  return out;
}

}  // namespace stratavg
