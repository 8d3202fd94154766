#pragma once

// Barotropic and complete (stiffened-gas family) equations of state, and the
// pressure-equilibrium root solve that closes the averaged models.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>
#include <utility>

#include "stratavg/errors.hpp"

namespace stratavg {

enum class BarotropicKind { GammaLaw, StiffenedGas };
enum class CompleteKind { IdealGas, StiffenedGas };

/// p(rho) = kappa * rho^gamma - pi0, with kappa > 0 and gamma >= 1.
template <typename Scalar>
struct BarotropicLaw {
  BarotropicKind kind = BarotropicKind::GammaLaw;
  Scalar kappa = Scalar(1);
  Scalar gamma = Scalar(1.4);
  Scalar pi0 = Scalar(0);

  static BarotropicLaw gamma_law(Scalar kappa, Scalar gamma) {
    return {BarotropicKind::GammaLaw, kappa, gamma, Scalar(0)};
  }
  static BarotropicLaw stiffened(Scalar kappa, Scalar gamma, Scalar pi0) {
    return {BarotropicKind::StiffenedGas, kappa, gamma, pi0};
  }
};

/// p = (gamma - 1) rho e - gamma pi0, theta = (rho e - pi0) / (rho cv).
template <typename Scalar>
struct CompleteEos {
  CompleteKind kind = CompleteKind::IdealGas;
  Scalar gamma = Scalar(1.4);
  Scalar cv = Scalar(1);
  Scalar pi0 = Scalar(0);

  static CompleteEos ideal(Scalar gamma, Scalar cv) { return {CompleteKind::IdealGas, gamma, cv, Scalar(0)}; }
  static CompleteEos stiffened(Scalar gamma, Scalar cv, Scalar pi0) {
    return {CompleteKind::StiffenedGas, gamma, cv, pi0};
  }
};

template <typename Scalar>
void validate(const BarotropicLaw<Scalar>& law) {
  if (!(law.kappa > 0) || !(law.gamma >= 1) || !(law.pi0 >= 0))
    throw DomainError("barotropic law requires kappa > 0, gamma >= 1, pi0 >= 0");
}

template <typename Scalar>
void validate(const CompleteEos<Scalar>& eos) {
  if (!(eos.gamma > 1) || !(eos.cv > 0) || !(eos.pi0 >= 0))
    throw DomainError("complete EOS requires gamma > 1, cv > 0, pi0 >= 0");
}

namespace detail {
template <typename Scalar>
void require_positive_density(Scalar rho) {
  if (!(rho > 0)) throw DomainError("density must be positive, got " + std::to_string(double(rho)));
}
template <typename Scalar>
void require_complete_domain(const CompleteEos<Scalar>& eos, Scalar rho, Scalar rho_e) {
  require_positive_density(rho);
  if (!(rho_e > eos.pi0))
    throw DomainError("internal energy per volume must exceed pi0, got " + std::to_string(double(rho_e)));
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Barotropic law

template <typename Scalar>
Scalar pressure(const BarotropicLaw<Scalar>& law, Scalar rho) {
  detail::require_positive_density(rho);
  using std::pow;
  return law.kappa * pow(rho, law.gamma) - law.pi0;
}

template <typename Scalar>
Scalar pressure_derivative(const BarotropicLaw<Scalar>& law, Scalar rho) {
  detail::require_positive_density(rho);
  using std::pow;
  return law.kappa * law.gamma * pow(rho, law.gamma - 1);
}

template <typename Scalar>
Scalar sound_speed(const BarotropicLaw<Scalar>& law, Scalar rho) {
  using std::sqrt;
  return sqrt(pressure_derivative(law, rho));
}

/// Inverse of pressure(); requires p > -pi0.
template <typename Scalar>
Scalar density_from_pressure(const BarotropicLaw<Scalar>& law, Scalar p) {
  if (!(p + law.pi0 > 0)) throw DomainError("pressure below the barotropic law's range");
  using std::pow;
  return pow((p + law.pi0) / law.kappa, 1 / law.gamma);
}

// ---------------------------------------------------------------------------
// Complete equation of state

template <typename Scalar>
Scalar pressure(const CompleteEos<Scalar>& eos, Scalar rho, Scalar rho_e) {
  detail::require_complete_domain(eos, rho, rho_e);
  return (eos.gamma - 1) * rho_e - eos.gamma * eos.pi0;
}

template <typename Scalar>
Scalar temperature(const CompleteEos<Scalar>& eos, Scalar rho, Scalar rho_e) {
  detail::require_complete_domain(eos, rho, rho_e);
  return (rho_e - eos.pi0) / (rho * eos.cv);
}

/// Specific entropy up to an additive constant: cv ln((p + pi0) / rho^gamma).
template <typename Scalar>
Scalar entropy(const CompleteEos<Scalar>& eos, Scalar rho, Scalar e) {
  const Scalar rho_e = rho * e;
  detail::require_complete_domain(eos, rho, rho_e);
  using std::log;
  using std::pow;
  const Scalar p = (eos.gamma - 1) * rho_e - eos.gamma * eos.pi0;
  return eos.cv * log((p + eos.pi0) / pow(rho, eos.gamma));
}

template <typename Scalar>
Scalar sound_speed(const CompleteEos<Scalar>& eos, Scalar rho, Scalar rho_e) {
  const Scalar p = pressure(eos, rho, rho_e);
  using std::sqrt;
  return sqrt(eos.gamma * (p + eos.pi0) / rho);
}

/// Specific internal energy reproducing pressure p at density rho.
template <typename Scalar>
Scalar internal_energy_from_pressure(const CompleteEos<Scalar>& eos, Scalar rho, Scalar p) {
  detail::require_positive_density(rho);
  const Scalar e = (p + eos.gamma * eos.pi0) / ((eos.gamma - 1) * rho);
  detail::require_complete_domain(eos, rho, rho * e);
  return e;
}

/// Specific internal energy at temperature theta and density rho.
template <typename Scalar>
Scalar internal_energy_from_temperature(const CompleteEos<Scalar>& eos, Scalar rho, Scalar theta) {
  detail::require_positive_density(rho);
  return eos.cv * theta + eos.pi0 / rho;
}

/// Partial derivatives of p(rho, e): {dp/drho at fixed e, dp/de at fixed rho}.
template <typename Scalar>
std::pair<Scalar, Scalar> pressure_partials(const CompleteEos<Scalar>& eos, Scalar rho, Scalar e) {
  detail::require_complete_domain(eos, rho, rho * e);
  return {(eos.gamma - 1) * e, (eos.gamma - 1) * rho};
}

/// Residuals of the Gibbs relation theta ds = de + p d(1/rho), with entropy
/// derivatives taken by centered differences of relative step delta.
/// Returns {|theta ds/de - 1|, |theta ds/dv - p| / max(1, |p|)} with v = 1/rho.
template <typename Scalar>
std::pair<Scalar, Scalar> gibbs_residual(const CompleteEos<Scalar>& eos, Scalar rho, Scalar e, Scalar delta) {
  const Scalar v = 1 / rho;
  const Scalar he = delta * e;
  const Scalar hv = delta * v;
  const auto s_of = [&](Scalar vv, Scalar ee) { return entropy(eos, 1 / vv, ee); };
  const Scalar ds_de = (s_of(v, e + he) - s_of(v, e - he)) / (2 * he);
  const Scalar ds_dv = (s_of(v + hv, e) - s_of(v - hv, e)) / (2 * hv);
  const Scalar theta = temperature(eos, rho, rho * e);
  const Scalar p = pressure(eos, rho, rho * e);
  using std::abs;
  using std::max;
  return {abs(theta * ds_de - 1), abs(theta * ds_dv - p) / max(Scalar(1), abs(p))};
}

// ---------------------------------------------------------------------------
// Pressure-equilibrium closure

template <typename Scalar>
struct ClosureResult {
  Scalar alpha1;
  Scalar p1;
  Scalar p2;
  int iterations;
};

struct ClosureOptions {
  double lower = 1e-9;
  double upper = 1 - 1e-9;
  double rtol = 1e-12;
  int max_iterations = 200;
};

namespace detail {

// Phase pressure as a function of its own volume fraction, with derivative.
template <typename Scalar>
struct BarotropicLoad {
  const BarotropicLaw<Scalar>& law;
  Scalar mass;
  std::pair<Scalar, Scalar> operator()(Scalar a) const {
    const Scalar rho = mass / a;
    return {pressure(law, rho), -pressure_derivative(law, rho) * rho / a};
  }
};

template <typename Scalar>
struct CompleteLoad {
  const CompleteEos<Scalar>& eos;
  Scalar mass;
  Scalar energy;  // m_k e_k, internal energy per unit total volume
  std::pair<Scalar, Scalar> operator()(Scalar a) const {
    const Scalar rho_e = energy / a;
    return {(eos.gamma - 1) * rho_e - eos.gamma * eos.pi0, -(eos.gamma - 1) * rho_e / a};
  }
};

// g(a) = p1(a) - p2(1 - a) is strictly decreasing; safeguarded Newton on a bracket.
template <typename Scalar, typename Load1, typename Load2>
ClosureResult<Scalar> solve_equilibrium(const Load1& phase1, const Load2& phase2, const ClosureOptions& opt,
                                        Scalar guess) {
  using std::abs;
  using std::max;
  const auto eval = [&](Scalar a) {
    const auto [p1, dp1] = phase1(a);
    const auto [p2, dp2] = phase2(1 - a);
    return std::make_tuple(p1 - p2, dp1 + dp2, p1, p2);
  };
  Scalar lo = Scalar(opt.lower);
  Scalar hi = Scalar(opt.upper);
  const auto [g_lo, d_lo, p1_lo, p2_lo] = eval(lo);
  const auto [g_hi, d_hi, p1_hi, p2_hi] = eval(hi);
  if (!(g_lo > 0) || !(g_hi < 0)) {
    if (g_lo == 0) return {lo, p1_lo, p2_lo, 0};
    if (g_hi == 0) return {hi, p1_hi, p2_hi, 0};
    throw ClosureError("pressure equilibrium has no root in (0,1): phase pressure ranges are incompatible");
  }
  Scalar a = (guess > lo && guess < hi) ? guess : Scalar(0.5) * (lo + hi);
  Scalar best = a;
  Scalar best_res = std::numeric_limits<Scalar>::infinity();
  for (int it = 1; it <= opt.max_iterations; ++it) {
    const auto [g, dg, p1, p2] = eval(a);
    const Scalar scale = max(abs(p1), abs(p2));
    const Scalar res = abs(g) / (scale > 0 ? scale : Scalar(1));
    if (res < best_res) {
      best_res = res;
      best = a;
    }
    if (abs(g) <= Scalar(opt.rtol) * scale || g == 0) return {a, p1, p2, it};
    if (g > 0)
      lo = a;
    else
      hi = a;
    Scalar next = a - g / dg;
    if (!(next > lo && next < hi) || !(dg < 0)) next = Scalar(0.5) * (lo + hi);
    if (next == a || hi - lo <= 4 * std::numeric_limits<Scalar>::epsilon() * max(abs(lo), abs(hi))) {
      const auto [g2, dg2, q1, q2] = eval(next);
      const Scalar sc2 = max(abs(q1), abs(q2));
      if (abs(g2) <= Scalar(opt.rtol) * sc2 || g2 == 0) return {next, q1, q2, it};
      throw ConvergenceError("pressure equilibrium bracket collapsed before reaching tolerance", double(best),
                             double(best_res));
    }
    a = next;
  }
  throw ConvergenceError("pressure equilibrium did not converge", double(best), double(best_res));
}

}  // namespace detail

/// Volume fraction alpha1 in (0,1) such that p1(m1/alpha1) = p2(m2/(1-alpha1)).
template <typename Scalar>
ClosureResult<Scalar> pressure_equilibrium_alpha(Scalar m1, Scalar m2, const BarotropicLaw<Scalar>& law1,
                                                 const BarotropicLaw<Scalar>& law2,
                                                 const ClosureOptions& opt = {}, Scalar guess = Scalar(-1)) {
  if (!(m1 > 0) || !(m2 > 0)) throw DomainError("partial masses must be positive");
  return detail::solve_equilibrium<Scalar>(detail::BarotropicLoad<Scalar>{law1, m1},
                                           detail::BarotropicLoad<Scalar>{law2, m2}, opt, guess);
}

/// Complete-EOS closure; energy_k = m_k e_k is the phasic internal energy per unit volume.
template <typename Scalar>
ClosureResult<Scalar> pressure_equilibrium_alpha(Scalar m1, Scalar m2, const CompleteEos<Scalar>& eos1,
                                                 const CompleteEos<Scalar>& eos2, Scalar energy1, Scalar energy2,
                                                 const ClosureOptions& opt = {}, Scalar guess = Scalar(-1)) {
  if (!(m1 > 0) || !(m2 > 0)) throw DomainError("partial masses must be positive");
  if (!(energy1 > 0) || !(energy2 > 0)) throw DomainError("phasic internal energies must be positive");
  auto r = detail::solve_equilibrium<Scalar>(detail::CompleteLoad<Scalar>{eos1, m1, energy1},
                                             detail::CompleteLoad<Scalar>{eos2, m2, energy2}, opt, guess);
  if (!(energy1 / r.alpha1 > eos1.pi0) || !(energy2 / (1 - r.alpha1) > eos2.pi0))
    throw ClosureError("pressure equilibrium root lies outside the stiffened-gas domain");
  return r;
}

}  // namespace stratavg
