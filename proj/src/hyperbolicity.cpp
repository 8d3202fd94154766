#include "stratavg/hyperbolicity.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace stratavg {

namespace {

bool has_energy(const MacroModel& m) { return m.variant == ModelVariant::TwoVelocityNsf; }

// Partial derivatives of the phase pressure: {dp/drho, dp/de}.
std::pair<double, double> pressure_slopes(const MacroModel& model, const MacroState& s, int k) {
  if (has_energy(model)) return pressure_partials(model.laws.complete[k], s.rho[k], s.e[k]);
  return {pressure_derivative(model.laws.barotropic[k], s.rho[k]), 0.0};
}

void require_closure(const MacroState& s) {
  const double scale = std::max({1.0, std::abs(s.p[0]), std::abs(s.p[1])});
  if (std::abs(s.p[0] - s.p[1]) > 1e-8 * scale)
    throw ClosureError("quasilinear form requires pressure equilibrium at the state point");
}

}  // namespace

MacroState equilibrium_state(const MacroModel& model, double alpha1, double p, double v1, double v2, double theta1,
                             double theta2) {
  MacroState s;
  s.alpha1 = alpha1;
  s.p = {p, p};
  if (model.variant == ModelVariant::OneVelocity) v2 = v1;
  s.v = {v1, v2};
  if (has_energy(model)) {
    const std::array<double, 2> th{theta1, theta2};
    for (int k = 0; k < 2; ++k) {
      const auto& eos = model.laws.complete[k];
      s.rho[k] = (p + eos.pi0) / ((eos.gamma - 1) * eos.cv * th[k]);
      s.e[k] = internal_energy_from_pressure(eos, s.rho[k], p);
      s.E[k] = s.e[k] + 0.5 * s.v[k] * s.v[k];
      s.theta[k] = temperature(eos, s.rho[k], s.rho[k] * s.e[k]);
    }
  } else {
    for (int k = 0; k < 2; ++k) s.rho[k] = density_from_pressure(model.laws.barotropic[k], p);
  }
  return s;
}

Eigen::VectorXd primitive_vector(const MacroModel& model, const MacroState& s) {
  switch (model.variant) {
    case ModelVariant::OneVelocity: return Eigen::Vector3d(s.alpha1, s.rho[0], s.v[0]);
    case ModelVariant::TwoVelocityBarotropic: return Eigen::Vector4d(s.alpha1, s.rho[0], s.v[0], s.v[1]);
    case ModelVariant::TwoVelocityNsf: {
      Eigen::VectorXd V(6);
      V << s.alpha1, s.rho[0], s.v[0], s.v[1], s.e[0], s.e[1];
      return V;
    }
  }
  return {};
}

MacroState state_from_primitive_vector(const MacroModel& model, const Eigen::Ref<const Eigen::VectorXd>& V) {
  MacroState s;
  s.alpha1 = V(0);
  s.rho[0] = V(1);
  if (model.variant == ModelVariant::OneVelocity) {
    s.v = {V(2), V(2)};
  } else {
    s.v = {V(2), V(3)};
  }
  if (has_energy(model)) {
    const auto& eos = model.laws.complete;
    s.e = {V(4), V(5)};
    const double p = pressure(eos[0], s.rho[0], s.rho[0] * s.e[0]);
    s.rho[1] = (p + eos[1].gamma * eos[1].pi0) / ((eos[1].gamma - 1) * s.e[1]);
    s.p = {p, pressure(eos[1], s.rho[1], s.rho[1] * s.e[1])};
    for (int k = 0; k < 2; ++k) {
      s.E[k] = s.e[k] + 0.5 * s.v[k] * s.v[k];
      s.theta[k] = temperature(eos[k], s.rho[k], s.rho[k] * s.e[k]);
    }
  } else {
    const auto& laws = model.laws.barotropic;
    const double p = pressure(laws[0], s.rho[0]);
    s.rho[1] = density_from_pressure(laws[1], p);
    s.p = {p, pressure(laws[1], s.rho[1])};
  }
  return s;
}

QuasilinearForm assemble_quasilinear(const MacroModel& model, const MacroState& s) {
  require_closure(s);
  const double w = model.params.w_pi;
  const double pi = w * s.p[0] + (1 - w) * s.p[1];
  const double a1 = s.alpha(0), a2 = s.alpha(1);
  const double r1 = s.rho[0], r2 = s.rho[1];
  const double m1 = a1 * r1, m2 = a2 * r2;
  const auto [p1r, p1e] = pressure_slopes(model, s, 0);
  const auto [p2r, p2e] = pressure_slopes(model, s, 1);

  // Auxiliary variables W = (alpha1, rho1, rho2, v1, v2[, e1, e2]).
  enum { A = 0, R1 = 1, R2 = 2, V1 = 3, V2 = 4, E1 = 5, E2 = 6 };
  const bool one = model.variant == ModelVariant::OneVelocity;
  const bool nsf = has_energy(model);
  const int n = model.num_vars();
  const int nw = one ? 4 : (nsf ? 7 : 5);
  Eigen::MatrixXd Et = Eigen::MatrixXd::Zero(n, nw);
  Eigen::MatrixXd Ex = Eigen::MatrixXd::Zero(n, nw);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(nw, n);

  const double v1 = s.v[0];
  const double v2 = one ? s.v[0] : s.v[1];
  const int iv1 = V1;
  const int iv2 = one ? V1 : V2;

  // Phase mass balances in advective form.
  Et(0, A) = r1;
  Et(0, R1) = a1;
  Ex(0, A) = r1 * v1;
  Ex(0, R1) = a1 * v1;
  Ex(0, iv1) += m1;
  Et(1, A) = -r2;
  Et(1, R2) = a2;
  Ex(1, A) = -r2 * v2;
  Ex(1, R2) = a2 * v2;
  Ex(1, iv2) += m2;

  if (one) {
    Et(2, V1) = m1 + m2;
    Ex(2, V1) = (m1 + m2) * v1;
    Ex(2, R1) += a1 * p1r;
    Ex(2, R2) += a2 * p2r;
    Ex(2, A) += s.p[0] - s.p[1];
    P(A, 0) = 1;
    P(R1, 1) = 1;
    P(R2, 1) = p1r / p2r;
    P(V1, 2) = 1;
  } else {
    Et(2, V1) = m1;
    Ex(2, V1) = m1 * v1;
    Ex(2, R1) += a1 * p1r;
    Ex(2, A) += s.p[0] - pi;
    Et(3, V2) = m2;
    Ex(3, V2) = m2 * v2;
    Ex(3, R2) += a2 * p2r;
    Ex(3, A) += -(s.p[1] - pi);
    P(A, 0) = 1;
    P(R1, 1) = 1;
    P(V1, 2) = 1;
    P(V2, 3) = 1;
    if (nsf) {
      Ex(2, E1) += a1 * p1e;
      Ex(3, E2) += a2 * p2e;
      // Internal energies: alpha rho De = (p alpha / rho) D rho + (p - p_i) D alpha_k.
      Et(4, E1) = m1;
      Et(4, R1) = -s.p[0] * a1 / r1;
      Et(4, A) = -(s.p[0] - pi);
      Ex.row(4) = v1 * Et.row(4);
      Et(5, E2) = m2;
      Et(5, R2) = -s.p[1] * a2 / r2;
      Et(5, A) = s.p[1] - pi;
      Ex.row(5) = v2 * Et.row(5);
      const double denom = (model.laws.complete[1].gamma - 1) * s.e[1];
      P(R2, 1) = p1r / denom;
      P(R2, 4) = p1e / denom;
      P(R2, 5) = -r2 / s.e[1];
      P(E1, 4) = 1;
      P(E2, 5) = 1;
    } else {
      P(R2, 1) = p1r / p2r;
    }
  }

  QuasilinearForm form;
  form.variant = model.variant;
  form.state = s;
  form.w_pi = w;
  form.A = (Et * P).partialPivLu().solve(Ex * P);
  return form;
}

Eigen::MatrixXd conserved_jacobian_fd(const MacroModel& model, const MacroState& s, double rel_step) {
  MacroModel tight = model;
  tight.closure.rtol = 1e-13;
  const Eigen::VectorXd U0 = conservative_from_primitive(tight, s);
  const int n = tight.num_vars();
  const bool two_velocity = tight.variant != ModelVariant::OneVelocity;
  const double w = tight.params.w_pi;

  Eigen::MatrixXd dF(n, n);
  Eigen::MatrixXd dAlpha(1, n);
  for (int j = 0; j < n; ++j) {
    const double h = rel_step * std::max(std::abs(U0(j)), 1e-3 * U0.cwiseAbs().maxCoeff());
    Eigen::VectorXd up = U0, dn = U0;
    up(j) += h;
    dn(j) -= h;
    const MacroState sp = primitive_from_conserved(tight, up, s.alpha1);
    const MacroState sm = primitive_from_conserved(tight, dn, s.alpha1);
    dF.col(j) = (convective_flux(tight, sp) - convective_flux(tight, sm)) / (2 * h);
    dAlpha(0, j) = (sp.alpha1 - sm.alpha1) / (2 * h);
  }

  const MacroState s0 = primitive_from_conserved(tight, U0, s.alpha1);
  const double pi = w * s0.p[0] + (1 - w) * s0.p[1];
  Eigen::MatrixXd K = dF;
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
  if (two_velocity) {
    K.row(2) -= pi * dAlpha.row(0);
    K.row(3) += pi * dAlpha.row(0);
    if (has_energy(tight)) {
      M.row(4) += pi * dAlpha.row(0);
      M.row(5) -= pi * dAlpha.row(0);
    }
  }
  return M.partialPivLu().solve(K);
}

Eigen::MatrixXd primitive_transform_fd(const MacroModel& model, const MacroState& s, double rel_step) {
  const Eigen::VectorXd V0 = primitive_vector(model, s);
  const int n = static_cast<int>(V0.size());
  Eigen::MatrixXd T(n, n);
  for (int j = 0; j < n; ++j) {
    const double h = rel_step * std::max(std::abs(V0(j)), 1.0);
    Eigen::VectorXd up = V0, dn = V0;
    up(j) += h;
    dn(j) -= h;
    T.col(j) = (conservative_from_primitive(model, state_from_primitive_vector(model, up)) -
                conservative_from_primitive(model, state_from_primitive_vector(model, dn))) /
               (2 * h);
  }
  return T;
}

Eigen::MatrixXd quasilinear_fd(const MacroModel& model, const MacroState& s, double rel_step) {
  const Eigen::MatrixXd T = primitive_transform_fd(model, s, rel_step);
  return T.partialPivLu().solve(conserved_jacobian_fd(model, s, rel_step) * T);
}

double wood_sound_speed(const MacroModel& model, const MacroState& s) {
  double compressibility = 0.0;
  double rho = 0.0;
  for (int k = 0; k < 2; ++k) {
    double c2;
    if (has_energy(model)) {
      // Isentropic speed of the phase.
      const double c = sound_speed(model.laws.complete[k], s.rho[k], s.rho[k] * s.e[k]);
      c2 = c * c;
    } else {
      c2 = pressure_derivative(model.laws.barotropic[k], s.rho[k]);
    }
    compressibility += s.alpha(k) / (s.rho[k] * c2);
    rho += s.alpha(k) * s.rho[k];
  }
  return std::sqrt(1.0 / (rho * compressibility));
}

double Spectrum::max_imag() const { return values.size() ? values.imag().cwiseAbs().maxCoeff() : 0.0; }

Spectrum spectrum(const Eigen::MatrixXd& A) {
  Spectrum out;
  out.matrix_norm = A.norm();
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
  if (es.info() != Eigen::Success) throw ConvergenceError("eigenvalue iteration did not converge", 0.0, 0.0);
  out.values = es.eigenvalues();
  // Eigenvector of each value: the right singular vector of A - lambda I with the
  // smallest singular value, which stays accurate for defective blocks.
  const Eigen::MatrixXcd Ac = A.cast<std::complex<double>>();
  const auto n = A.rows();
  for (Eigen::Index i = 0; i < out.values.size(); ++i) {
    const Eigen::MatrixXcd shifted = Ac - out.values(i) * Eigen::MatrixXcd::Identity(n, n);
    const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(shifted, Eigen::ComputeFullV);
    const Eigen::VectorXcd v = svd.matrixV().col(n - 1);
    out.max_residual = std::max(out.max_residual, (shifted * v).norm());
  }
  if (out.max_residual > 1e-8 * std::max(out.matrix_norm, 1e-300))
    throw ConvergenceError("eigenpair residual above 1e-8 ||A||", 0.0, out.max_residual);
  return out;
}

Spectrum spectrum(const QuasilinearForm& form) { return spectrum(form.A); }

HyperbolicityMap hyperbolicity_map(const MacroModel& model, double p, const Eigen::VectorXd& dv_over_c,
                                   const Eigen::VectorXd& alpha1, double theta1, double theta2) {
  HyperbolicityMap map;
  map.dv_over_c = dv_over_c;
  map.alpha1 = alpha1;
  map.max_imag.resize(alpha1.size(), dv_over_c.size());
  map.max_imag_rel.resize(alpha1.size(), dv_over_c.size());
  for (Eigen::Index i = 0; i < alpha1.size(); ++i) {
    const MacroState ref = equilibrium_state(model, alpha1(i), p, 0.0, 0.0, theta1, theta2);
    double c = 0.0;
    for (int k = 0; k < 2; ++k)
      c = std::max(c, has_energy(model) ? sound_speed(model.laws.complete[k], ref.rho[k], ref.rho[k] * ref.e[k])
                                        : sound_speed(model.laws.barotropic[k], ref.rho[k]));
    for (Eigen::Index j = 0; j < dv_over_c.size(); ++j) {
      const double dv = dv_over_c(j) * c;
      const MacroState s = model.variant == ModelVariant::OneVelocity
                               ? equilibrium_state(model, alpha1(i), p, dv, dv, theta1, theta2)
                               : equilibrium_state(model, alpha1(i), p, 0.5 * dv, -0.5 * dv, theta1, theta2);
      const Spectrum sp = spectrum(assemble_quasilinear(model, s));
      map.max_imag(i, j) = sp.max_imag();
      map.max_imag_rel(i, j) = sp.max_imag() / sp.matrix_norm;
    }
  }
  return map;
}

}  // namespace stratavg
