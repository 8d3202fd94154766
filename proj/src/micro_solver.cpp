#include "stratavg/micro_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "stratavg/errors.hpp"

namespace stratavg {

namespace {

using Arr = Eigen::ArrayXXd;
using Col = Eigen::ArrayXd;

int wrap(int i, int n) { return (i % n + n) % n; }

// Height weight of the sigma map: z = alpha s (layer 0), z = alpha + s (1 - alpha) (layer 1).
// z_x = zeta(s) alpha_x and z_t = zeta(s) alpha_t.
double zeta(int k, double s) { return k == 0 ? s : 1.0 - s; }

double cell_s(int j, double ds) { return (j + 0.5) * ds; }

Col central_x(const Col& a, double dx) {
  const int n = static_cast<int>(a.size());
  Col out(n);
  for (int i = 0; i < n; ++i) out(i) = (a(wrap(i + 1, n)) - a(wrap(i - 1, n))) / (2 * dx);
  return out;
}

// Solves a_i x_{i-1} + b_i x_i + c_i x_{i+1} = d_i in place (d becomes x).
void solve_tridiagonal(const Eigen::VectorXd& a, Eigen::VectorXd b, const Eigen::VectorXd& c, Eigen::VectorXd& d) {
  const Eigen::Index n = d.size();
  for (Eigen::Index i = 1; i < n; ++i) {
    const double m = a(i) / b(i - 1);
    b(i) -= m * c(i - 1);
    d(i) -= m * d(i - 1);
  }
  d(n - 1) /= b(n - 1);
  for (Eigen::Index i = n - 2; i >= 0; --i) d(i) = (d(i) - c(i) * d(i + 1)) / b(i);
}

void check_state(const MicroFields& f, const MicroConfig& cfg) {
  const double amin = cfg.options.alpha_min;
  for (int i = 0; i < f.nx(); ++i) {
    const double a = f.alpha(i);
    if (!std::isfinite(a)) throw GeometryError("non-finite interface height at column " + std::to_string(i));
    if (!(a > amin && a < 1.0 - amin))
      throw RegimeExitError("interface left the stratification band at column " + std::to_string(i) +
                            " (alpha = " + std::to_string(a) + ")");
  }
  for (int k = 0; k < 2; ++k) {
    const Arr& m = f.layer[k].mass;
    for (Eigen::Index idx = 0; idx < m.size(); ++idx)
      if (!(m(idx) > 0) || !std::isfinite(f.layer[k].xmom(idx)))
        throw PositivityError("non-positive layer density in layer " + std::to_string(k + 1),
                              static_cast<std::size_t>(idx));
  }
}

// Interface w rows from vn and the adjacent cell velocities.
void fill_interface_rows(MicroFields& f, const Col& ax) {
  const int ns = f.ns();
  for (int i = 0; i < f.nx(); ++i) {
    const double u1 = f.layer[0].xmom(ns - 1, i) / f.layer[0].mass(ns - 1, i);
    const double u2 = f.layer[1].xmom(0, i) / f.layer[1].mass(0, i);
    f.layer[0].w(ns, i) = f.vn(i) + ax(i) * u1;
    f.layer[1].w(0, i) = f.vn(i) + ax(i) * u2;
  }
}

void fill_wall_rows(MicroFields& f) {
  f.layer[0].w.row(0).setZero();
  f.layer[1].w.row(f.ns()).setZero();
}

struct LayerWork {
  Col H;
  Arr rho, u, p, c;
  Arr us;   // du/ds
  Arr uxz;  // du/dx at fixed z
  Arr wz;   // dw/dz at cell centres
  Arr txx;  // lambda div + 2 mu u_x
  Arr szz_soft;  // -p + lambda u_x (the part of sigma_zz kept explicit)
  double mu = 0, lambda = 0;
};

LayerWork layer_work(const MicroFields& f, const MicroConfig& cfg, int k, const Col& ax) {
  const int ns = f.ns(), nx = f.nx();
  const double ds = cfg.grid.ds(), dx = cfg.grid.dx();
  LayerWork L;
  L.mu = cfg.regime.mu(k);
  L.lambda = cfg.regime.lambda(k);
  L.H = layer_thickness(f.alpha, k);
  const LayerFields& lf = f.layer[k];
  L.rho = lf.mass.rowwise() / L.H.transpose();
  L.u = lf.xmom / lf.mass;
  L.p = L.rho.unaryExpr([&](double r) { return pressure(cfg.laws[k], r); });
  L.c = L.rho.unaryExpr([&](double r) { return sound_speed(cfg.laws[k], r); });

  L.us.resize(ns, nx);
  for (int i = 0; i < nx; ++i) {
    for (int j = 1; j < ns - 1; ++j) L.us(j, i) = (L.u(j + 1, i) - L.u(j - 1, i)) / (2 * ds);
    L.us(0, i) = (-3 * L.u(0, i) + 4 * L.u(1, i) - L.u(2, i)) / (2 * ds);
    L.us(ns - 1, i) = (3 * L.u(ns - 1, i) - 4 * L.u(ns - 2, i) + L.u(ns - 3, i)) / (2 * ds);
  }
  L.uxz.resize(ns, nx);
  L.wz.resize(ns, nx);
  for (int i = 0; i < nx; ++i) {
    const int ip = wrap(i + 1, nx), imn = wrap(i - 1, nx);
    for (int j = 0; j < ns; ++j) {
      const double zx = zeta(k, cell_s(j, ds)) * ax(i);
      L.uxz(j, i) = (L.u(j, ip) - L.u(j, imn)) / (2 * dx) - zx / L.H(i) * L.us(j, i);
      L.wz(j, i) = (lf.w(j + 1, i) - lf.w(j, i)) / (L.H(i) * ds);
    }
  }
  L.txx = L.lambda * (L.uxz + L.wz) + 2 * L.mu * L.uxz;
  L.szz_soft = -L.p + L.lambda * L.uxz;
  return L;
}

// dw/dx at fixed z on the face rows of layer k.
Arr face_wx(const MicroFields& f, const LayerWork& L, int k, const Col& ax, double dx, double ds) {
  const int ns = f.ns(), nx = f.nx();
  const Arr& w = f.layer[k].w;
  Arr out(ns + 1, nx);
  for (int i = 0; i < nx; ++i) {
    const int ip = wrap(i + 1, nx), imn = wrap(i - 1, nx);
    for (int r = 0; r <= ns; ++r) {
      double ws;
      if (r == 0) ws = (w(1, i) - w(0, i)) / ds;
      else if (r == ns) ws = (w(ns, i) - w(ns - 1, i)) / ds;
      else ws = (w(r + 1, i) - w(r - 1, i)) / (2 * ds);
      out(r, i) = (w(r, ip) - w(r, imn)) / (2 * dx) - zeta(k, r * ds) * ax(i) / L.H(i) * ws;
    }
  }
  return out;
}

struct WallData {
  Col implicit;  // K: G-flux magnitude K u_adjacent
  Col ghost, wall_u;
};

WallData wall_data(const LayerWork& L, const MicroConfig& cfg, int k, int row) {
  const double eps = cfg.regime.eps, ds = cfg.grid.ds();
  const double kappa = cfg.regime.kappa(k);
  const Eigen::Index nx = L.H.size();
  WallData w{Col(nx), Col(nx), Col(nx)};
  for (Eigen::Index i = 0; i < nx; ++i) {
    const double d = 0.5 * L.H(i) * ds;
    const double a = L.mu / (eps * d);
    const double u0 = L.u(row, i);
    w.ghost(i) = u0 * (a - kappa) / (a + kappa);
    w.wall_u(i) = u0 * a / (a + kappa);
    w.implicit(i) = kappa * a / ((a + kappa) * eps);
  }
  return w;
}

struct InterfaceData {
  Col shear_explicit;  // S minus its (b - a) part
  Col coef;            // S = coef (b - a) + shear_explicit
  Col tx_explicit;     // averaged traction without coef (b - a) / (eps c)
  Col implicit;        // coef / (eps c)
  Col tau_xz;          // averaged interface tau_xz (full)
  Col t1, t2;          // traces
};

InterfaceData interface_data(const MicroFields& f, const MicroConfig& cfg, const std::array<LayerWork, 2>& L,
                             const std::array<Arr, 2>& wx, const Col& ax) {
  const int ns = f.ns(), nx = f.nx();
  const double eps = cfg.regime.eps, ds = cfg.grid.ds();
  const double g = cfg.regime.kappa_i();
  InterfaceData d{Col(nx), Col(nx), Col(nx), Col(nx), Col(nx), Col(nx), Col(nx)};
  for (int i = 0; i < nx; ++i) {
    const double c = 1.0 - eps * eps * ax(i) * ax(i);
    const int top = ns - 1;
    const double a = L[0].u(top, i), b = L[1].u(0, i);
    const double d1 = 0.5 * L[0].H(i) * ds, d2 = 0.5 * L[1].H(i) * ds;
    const double r1 = L[0].mu * c / (eps * d1), r2 = L[1].mu * c / (eps * d2);
    const double ux1 = L[0].uxz(top, i), ux2 = L[1].uxz(0, i);
    const double wz1 = L[0].wz(top, i), wz2 = L[1].wz(0, i);
    const double E1 = L[0].mu * eps * (c * wx[0](ns, i) - 2 * ax(i) * (ux1 - wz1));
    const double E2 = L[1].mu * eps * (c * wx[1](0, i) - 2 * ax(i) * (ux2 - wz2));
    const double dw = f.layer[0].w(ns, i) - f.layer[1].w(0, i);
    const double denom = 1.0 + g / r1 + g / r2;
    const double coef = g / denom;
    const double s_exp = g * (E1 / r1 + E2 / r2 - eps * eps * ax(i) * dw) / denom;
    const double S = coef * (b - a) + s_exp;

    const double tau1 = (S / eps + 2 * ax(i) * L[0].mu * (ux1 - wz1)) / c;
    const double tau2 = (S / eps + 2 * ax(i) * L[1].mu * (ux2 - wz2)) / c;
    const double tx1 = ax(i) * (L[0].p(top, i) - L[0].txx(top, i)) + tau1;
    const double tx2 = ax(i) * (L[1].p(0, i) - L[1].txx(0, i)) + tau2;
    const double lin = coef * (b - a) / (eps * c);

    d.coef(i) = coef;
    d.shear_explicit(i) = s_exp;
    d.implicit(i) = coef / (eps * c);
    d.tx_explicit(i) = 0.5 * (tx1 + tx2) - lin;
    d.tau_xz(i) = 0.5 * (tau1 + tau2);
    d.t1(i) = a + (S - E1) / r1;
    d.t2(i) = b - (S - E2) / r2;
  }
  return d;
}

// Explicit rates. With `stiff` false, the vertical viscous operator (mu u_z / eps^2,
// wall and interface friction on u, (lambda + 2 mu) w_z in sigma_zz) is left out.
MicroFields rates(const MicroFields& f, const MicroConfig& cfg, bool stiff) {
  const int ns = f.ns(), nx = f.nx();
  const double dx = cfg.grid.dx(), ds = cfg.grid.ds(), eps = cfg.regime.eps, eps2 = eps * eps;
  const Col ax = central_x(f.alpha, dx);

  std::array<LayerWork, 2> L{layer_work(f, cfg, 0, ax), layer_work(f, cfg, 1, ax)};
  std::array<Arr, 2> wx{face_wx(f, L[0], 0, ax, dx, ds), face_wx(f, L[1], 1, ax, dx, ds)};
  const InterfaceData itf = interface_data(f, cfg, L, wx, ax);
  const std::array<WallData, 2> wall{wall_data(L[0], cfg, 0, 0), wall_data(L[1], cfg, 1, ns - 1)};

  MicroFields out = zero_fields(cfg.grid);
  out.alpha = f.vn;

  for (int k = 0; k < 2; ++k) {
    const LayerWork& Lk = L[k];
    const LayerFields& lf = f.layer[k];
    LayerFields& rk = out.layer[k];

    // x-faces: face i sits between columns i and i+1.
    for (int i = 0; i < nx; ++i) {
      const int ip = wrap(i + 1, nx);
      const double Hf = 0.5 * (Lk.H(i) + Lk.H(ip));
      const double axf = (f.alpha(ip) - f.alpha(i)) / dx;
      for (int j = 0; j < ns; ++j) {
        const double uf = 0.5 * (Lk.u(j, i) + Lk.u(j, ip));
        const double mflux = uf >= 0 ? uf * lf.mass(j, i) : uf * lf.mass(j, ip);
        const double uup = uf >= 0 ? Lk.u(j, i) : Lk.u(j, ip);
        const double zxf = zeta(k, cell_s(j, ds)) * axf;
        const double uxz = (Lk.u(j, ip) - Lk.u(j, i)) / dx - zxf / Hf * 0.5 * (Lk.us(j, i) + Lk.us(j, ip));
        const double wz = 0.5 * (Lk.wz(j, i) + Lk.wz(j, ip));
        const double txx = Lk.lambda * (uxz + wz) + 2 * Lk.mu * uxz;
        const double pf = 0.5 * (Lk.p(j, i) + Lk.p(j, ip));
        const double mom = mflux * uup + Hf * (pf - txx);
        rk.mass(j, i) -= mflux / dx;
        rk.mass(j, ip) += mflux / dx;
        rk.xmom(j, i) -= mom / dx;
        rk.xmom(j, ip) += mom / dx;
      }
    }

    // s-faces. tau_xz on every face row, used again by the w equation.
    Arr tau(ns + 1, nx);
    Arr W = Arr::Zero(ns + 1, nx);
    for (int i = 0; i < nx; ++i) {
      for (int r = 1; r < ns; ++r) {
        const double sf = r * ds;
        const double zx = zeta(k, sf) * ax(i);
        const double zt = zeta(k, sf) * f.vn(i);
        const double uf = 0.5 * (Lk.u(r - 1, i) + Lk.u(r, i));
        const double Wr = lf.w(r, i) - zx * uf - zt;
        W(r, i) = Wr;
        const double rho_up = Wr >= 0 ? Lk.rho(r - 1, i) : Lk.rho(r, i);
        const double u_up = Wr >= 0 ? Lk.u(r - 1, i) : Lk.u(r, i);
        const double ms = rho_up * Wr;
        const double uz = (Lk.u(r, i) - Lk.u(r - 1, i)) / (Lk.H(i) * ds);
        const double tau_soft = Lk.mu * wx[k](r, i);
        const double tau_stiff = Lk.mu * uz / eps2;
        tau(r, i) = tau_soft + tau_stiff;
        const double pt = 0.5 * (Lk.p(r - 1, i) - Lk.txx(r - 1, i) + Lk.p(r, i) - Lk.txx(r, i));
        const double G = ms * u_up - tau_soft - (stiff ? tau_stiff : 0.0) - zx * pt;
        rk.mass(r - 1, i) -= ms / ds;
        rk.mass(r, i) += ms / ds;
        rk.xmom(r - 1, i) -= G / ds;
        rk.xmom(r, i) += G / ds;
      }
      // walls and interface
      if (k == 0) {
        tau(0, i) = wall[0].implicit(i) * Lk.u(0, i);
        tau(ns, i) = itf.tau_xz(i);
        if (stiff) rk.xmom(0, i) -= wall[0].implicit(i) * Lk.u(0, i) / ds;
        const double tx = itf.tx_explicit(i) + (stiff ? itf.implicit(i) * (L[1].u(0, i) - Lk.u(ns - 1, i)) : 0.0);
        rk.xmom(ns - 1, i) += tx / ds;
      } else {
        tau(ns, i) = -wall[1].implicit(i) * Lk.u(ns - 1, i);
        tau(0, i) = itf.tau_xz(i);
        if (stiff) rk.xmom(ns - 1, i) -= wall[1].implicit(i) * Lk.u(ns - 1, i) / ds;
        const double tx = itf.tx_explicit(i) + (stiff ? itf.implicit(i) * (Lk.u(0, i) - L[0].u(ns - 1, i)) : 0.0);
        rk.xmom(0, i) -= tx / ds;
      }
    }

    // w on interior faces.
    const Arr szz = Lk.szz_soft + (stiff ? ((Lk.lambda + 2 * Lk.mu) * Lk.wz).eval() : Arr::Zero(ns, nx).eval());
    for (int i = 0; i < nx; ++i) {
      const int ip = wrap(i + 1, nx), imn = wrap(i - 1, nx);
      for (int r = 1; r < ns; ++r) {
        const double rho_f = 0.5 * (Lk.rho(r - 1, i) + Lk.rho(r, i));
        const double uf = 0.5 * (Lk.u(r - 1, i) + Lk.u(r, i));
        const double zx = zeta(k, r * ds) * ax(i);
        const double dtau = (tau(r, ip) - tau(r, imn)) / (2 * dx) -
                            zx / Lk.H(i) * (tau(r + 1, i) - tau(r - 1, i)) / (2 * ds);
        const double wxs = uf >= 0 ? (lf.w(r, i) - lf.w(r, imn)) / dx : (lf.w(r, ip) - lf.w(r, i)) / dx;
        const double wss = W(r, i) >= 0 ? (lf.w(r, i) - lf.w(r - 1, i)) / ds : (lf.w(r + 1, i) - lf.w(r, i)) / ds;
        rk.w(r, i) = (szz(r, i) - szz(r - 1, i)) / (eps2 * rho_f * Lk.H(i) * ds) + dtau / rho_f - uf * wxs -
                     W(r, i) / Lk.H(i) * wss;
      }
    }

    if (k == 1) {
      // interface normal velocity
      const Arr szz0 = L[0].szz_soft + (stiff ? ((L[0].lambda + 2 * L[0].mu) * L[0].wz).eval()
                                              : Arr::Zero(ns, nx).eval());
      const Col tx_tau = itf.tau_xz;
      for (int i = 0; i < nx; ++i) {
        const int ip = wrap(i + 1, nx), imn = wrap(i - 1, nx);
        const double d1 = 0.5 * L[0].H(i) * ds, d2 = 0.5 * L[1].H(i) * ds;
        const double M = L[0].rho(ns - 1, i) * d1 + L[1].rho(0, i) * d2;
        const double ubar = 0.5 * (L[0].u(ns - 1, i) + L[1].u(0, i));
        const double vx = ubar >= 0 ? (f.vn(i) - f.vn(imn)) / dx : (f.vn(ip) - f.vn(i)) / dx;
        const double dtau = (tx_tau(ip) - tx_tau(imn)) / (2 * dx);
        out.vn(i) = (szz(0, i) - szz0(ns - 1, i)) / (eps2 * M) + (d1 + d2) * dtau / M - ubar * vx;
      }
    }
  }
  return out;
}

void combine(MicroFields& y, double a, const MicroFields& x, double b, const MicroFields& z) {
  for (int k = 0; k < 2; ++k) {
    y.layer[k].mass = a * x.layer[k].mass + b * z.layer[k].mass;
    y.layer[k].xmom = a * x.layer[k].xmom + b * z.layer[k].xmom;
    y.layer[k].w = a * x.layer[k].w + b * z.layer[k].w;
  }
  y.alpha = a * x.alpha + b * z.alpha;
  y.vn = a * x.vn + b * z.vn;
}

// y = a x + b (z + dt L(z)), then boundary rows refreshed.
MicroFields rk_stage(double a, const MicroFields& x, double b, const MicroFields& z, double dt,
                     const MicroConfig& cfg, bool stiff) {
  const MicroFields L = rates(z, cfg, stiff);
  MicroFields e = zero_fields(cfg.grid);
  combine(e, 1.0, z, dt, L);
  MicroFields y = zero_fields(cfg.grid);
  combine(y, a, x, b, e);
  check_state(y, cfg);
  fill_wall_rows(y);
  fill_interface_rows(y, central_x(y.alpha, cfg.grid.dx()));
  return y;
}

// Backward Euler on the vertical viscous operator, column by column.
void implicit_viscous(MicroFields& f, const MicroConfig& cfg, double dt) {
  const int ns = f.ns(), nx = f.nx();
  const double dx = cfg.grid.dx(), ds = cfg.grid.ds(), eps = cfg.regime.eps, eps2 = eps * eps;
  const Col ax = central_x(f.alpha, dx);
  std::array<LayerWork, 2> L{layer_work(f, cfg, 0, ax), layer_work(f, cfg, 1, ax)};
  std::array<Arr, 2> wx{face_wx(f, L[0], 0, ax, dx, ds), face_wx(f, L[1], 1, ax, dx, ds)};
  const InterfaceData itf = interface_data(f, cfg, L, wx, ax);
  const std::array<WallData, 2> wall{wall_data(L[0], cfg, 0, 0), wall_data(L[1], cfg, 1, ns - 1)};

  const int nu = 2 * ns, nw = 2 * ns - 1;
  Eigen::VectorXd a(nu), b(nu), c(nu), d(nu);
  Eigen::VectorXd aw(nw), bw(nw), cw(nw), dw(nw);
  Eigen::VectorXd coupling(nu + 1), dcell(nu), mass(nu);
  for (int i = 0; i < nx; ++i) {
    // u: cells 0..ns-1 of layer 0, then layer 1. coupling(n) links cells n-1 and n.
    for (int k = 0; k < 2; ++k)
      for (int j = 0; j < ns; ++j) mass(k * ns + j) = f.layer[k].mass(j, i);
    coupling.setZero();
    for (int k = 0; k < 2; ++k)
      for (int r = 1; r < ns; ++r) coupling(k * ns + r) = L[k].mu / (eps2 * L[k].H(i) * ds);
    coupling(ns) = itf.implicit(i);
    const double g = dt / ds;
    for (int n = 0; n < nu; ++n) {
      const double cl = coupling(n), cr = coupling(n + 1);
      double diag = mass(n) + g * (cl + cr);
      if (n == 0) diag += g * wall[0].implicit(i);
      if (n == nu - 1) diag += g * wall[1].implicit(i);
      a(n) = -g * cl;
      b(n) = diag;
      c(n) = -g * cr;
      const int k = n / ns, j = n % ns;
      d(n) = f.layer[k].xmom(j, i);
    }
    solve_tridiagonal(a, b, c, d);
    for (int n = 0; n < nu; ++n) {
      const int k = n / ns, j = n % ns;
      f.layer[k].xmom(j, i) = mass(n) * d(n);
    }
    const double u1 = d(ns - 1), u2 = d(ns);

    // w: nodes are layer-0 faces 1..ns-1, vn, layer-1 faces 1..ns-1. Cell n lies
    // between node n-1 and node n (walls at both ends).
    for (int k = 0; k < 2; ++k)
      for (int j = 0; j < ns; ++j)
        dcell(k * ns + j) = (L[k].lambda + 2 * L[k].mu) / (L[k].H(i) * ds);
    const double o1 = ax(i) * u1, o2 = ax(i) * u2;
    for (int g2 = 0; g2 < nw; ++g2) {
      double m;
      double rhs;
      if (g2 < ns - 1) {
        const int r = g2 + 1;
        m = eps2 * 0.5 * (L[0].rho(r - 1, i) + L[0].rho(r, i)) * L[0].H(i) * ds;
        rhs = m * f.layer[0].w(r, i);
      } else if (g2 == ns - 1) {
        m = eps2 * (L[0].rho(ns - 1, i) * 0.5 * L[0].H(i) * ds + L[1].rho(0, i) * 0.5 * L[1].H(i) * ds);
        rhs = m * f.vn(i);
      } else {
        const int r = g2 - ns + 1;
        m = eps2 * 0.5 * (L[1].rho(r - 1, i) + L[1].rho(r, i)) * L[1].H(i) * ds;
        rhs = m * f.layer[1].w(r, i);
      }
      const double below = dcell(g2), above = dcell(g2 + 1);
      aw(g2) = -dt * below;
      bw(g2) = m + dt * (below + above);
      cw(g2) = -dt * above;
      // the offsets enter where the interface node borders a cell
      if (g2 == ns - 2) rhs += dt * above * o1;
      if (g2 == ns - 1) rhs -= dt * (below * o1 + above * o2);
      if (g2 == ns) rhs += dt * below * o2;
      dw(g2) = rhs;
    }
    solve_tridiagonal(aw, bw, cw, dw);
    for (int r = 1; r < ns; ++r) f.layer[0].w(r, i) = dw(r - 1);
    f.vn(i) = dw(ns - 1);
    for (int r = 1; r < ns; ++r) f.layer[1].w(r, i) = dw(ns - 1 + r);
  }
  fill_interface_rows(f, ax);
}

}  // namespace

MicroFields zero_fields(const MicroGrid& grid) {
  MicroFields f;
  for (auto& l : f.layer) {
    l.mass = Arr::Zero(grid.ns, grid.nx);
    l.xmom = Arr::Zero(grid.ns, grid.nx);
    l.w = Arr::Zero(grid.ns + 1, grid.nx);
  }
  f.alpha = Col::Zero(grid.nx);
  f.vn = Col::Zero(grid.nx);
  return f;
}

Eigen::ArrayXd layer_thickness(const Eigen::ArrayXd& alpha, int k) {
  return k == 0 ? alpha : (1.0 - alpha).eval();
}

Eigen::ArrayXXd density(const MicroFields& f, int k) {
  return f.layer[k].mass.rowwise() / layer_thickness(f.alpha, k).transpose();
}

Eigen::ArrayXXd velocity(const MicroFields& f, int k) { return f.layer[k].xmom / f.layer[k].mass; }

Eigen::ArrayXXd layer_pressure(const MicroFields& f, const MicroConfig& cfg, int k) {
  return density(f, k).unaryExpr([&](double r) { return pressure(cfg.laws[k], r); });
}

Eigen::ArrayXXd cell_heights(const MicroFields& f, int k) {
  const int ns = f.ns();
  const double ds = 1.0 / ns;
  Arr z(ns, f.nx());
  for (int i = 0; i < f.nx(); ++i)
    for (int j = 0; j < ns; ++j) {
      const double s = cell_s(j, ds);
      z(j, i) = k == 0 ? s * f.alpha(i) : f.alpha(i) + s * (1.0 - f.alpha(i));
    }
  return z;
}

double phase_mass(const MicroFields& f, int k) {
  return f.layer[k].mass.sum() / (static_cast<double>(f.ns()) * f.nx());
}

SigmaDerivatives sigma_derivatives(const Eigen::ArrayXXd& field, const Eigen::ArrayXd& alpha, int k,
                                   const MicroGrid& grid, double alpha_min) {
  const int ns = static_cast<int>(field.rows()), nx = static_cast<int>(field.cols());
  if (ns < 3) throw GeometryError("sigma grid needs at least 3 cells per layer");
  const Col H = layer_thickness(alpha, k);
  for (int i = 0; i < nx; ++i)
    if (!(H(i) > alpha_min)) throw GeometryError("layer thickness below alpha_min at column " + std::to_string(i));
  const double ds = 1.0 / ns, dx = grid.dx();
  const Col ax = central_x(alpha, dx);
  SigmaDerivatives out{Arr(ns, nx), Arr(ns, nx)};
  for (int i = 0; i < nx; ++i) {
    const int ip = wrap(i + 1, nx), imn = wrap(i - 1, nx);
    for (int j = 0; j < ns; ++j) {
      double fs;
      if (j == 0) fs = (-3 * field(0, i) + 4 * field(1, i) - field(2, i)) / (2 * ds);
      else if (j == ns - 1) fs = (3 * field(j, i) - 4 * field(j - 1, i) + field(j - 2, i)) / (2 * ds);
      else fs = (field(j + 1, i) - field(j - 1, i)) / (2 * ds);
      out.dz(j, i) = fs / H(i);
      out.dx(j, i) = (field(j, ip) - field(j, imn)) / (2 * dx) - zeta(k, cell_s(j, ds)) * ax(i) * out.dz(j, i);
    }
  }
  return out;
}

std::array<WallTrace, 2> apply_wall_conditions(MicroFields& f, const MicroConfig& cfg) {
  fill_wall_rows(f);
  const Col ax = central_x(f.alpha, cfg.grid.dx());
  std::array<WallTrace, 2> out;
  for (int k = 0; k < 2; ++k) {
    const LayerWork L = layer_work(f, cfg, k, ax);
    const WallData w = wall_data(L, cfg, k, k == 0 ? 0 : f.ns() - 1);
    out[k].ghost = w.ghost;
    out[k].wall_u = w.wall_u;
    out[k].implicit = w.implicit;
    out[k].shear = (k == 0 ? 1.0 : -1.0) * w.implicit * (k == 0 ? L.u.row(0) : L.u.row(f.ns() - 1)).transpose();
  }
  return out;
}

InterfaceCoupling apply_interface_conditions(MicroFields& f, const MicroConfig& cfg) {
  const double dx = cfg.grid.dx(), ds = cfg.grid.ds();
  const Col ax = central_x(f.alpha, dx);
  fill_interface_rows(f, ax);
  std::array<LayerWork, 2> L{layer_work(f, cfg, 0, ax), layer_work(f, cfg, 1, ax)};
  std::array<Arr, 2> wx{face_wx(f, L[0], 0, ax, dx, ds), face_wx(f, L[1], 1, ax, dx, ds)};
  const InterfaceData d = interface_data(f, cfg, L, wx, ax);
  InterfaceCoupling out;
  out.alpha_x = ax;
  out.trace_u1 = d.t1;
  out.trace_u2 = d.t2;
  const Col jump = L[1].u.row(0).transpose() - L[0].u.row(f.ns() - 1).transpose();
  out.shear = d.coef * jump + d.shear_explicit;
  out.implicit = d.implicit;
  out.traction_x = d.tx_explicit + d.implicit * jump;
  out.tau_xz = d.tau_xz;
  return out;
}

MicroFields micro_rhs(const MicroFields& f, const MicroConfig& cfg) {
  check_state(f, cfg);
  return rates(f, cfg, true);
}

double micro_stable_dt(const MicroFields& f, const MicroConfig& cfg) {
  const double dx = cfg.grid.dx(), ds = cfg.grid.ds(), eps = cfg.regime.eps;
  double dt = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 2; ++k) {
    const Col H = layer_thickness(f.alpha, k);
    const Arr rho = density(f, k);
    const Arr u = velocity(f, k);
    const Arr c = rho.unaryExpr([&](double r) { return sound_speed(cfg.laws[k], r); });
    const double mu = cfg.regime.mu(k), lambda = cfg.regime.lambda(k);
    const double hmin = H.minCoeff() * ds;
    const double rmin = rho.minCoeff();
    dt = std::min(dt, dx / (u.abs() + c).maxCoeff());
    dt = std::min(dt, eps * hmin / c.maxCoeff());
    if (lambda + mu > 0) {
      dt = std::min(dt, eps * rmin * dx * hmin / (lambda + mu));
      dt = std::min(dt, 0.5 * rmin * dx * dx / (lambda + 2 * mu));
    }
    if (!cfg.options.implicit_viscosity && mu > 0) {
      const double visc = std::max(mu, lambda + 2 * mu);
      dt = std::min(dt, 0.5 * eps * eps * rmin * hmin * hmin / visc);
      const double K = std::max(cfg.regime.kappa(k), cfg.regime.kappa_i()) / eps;
      if (K > 0) dt = std::min(dt, 0.5 * rmin * hmin / K);
    }
  }
  return cfg.options.cfl * dt;
}

MicroFields micro_step(const MicroFields& f, const MicroConfig& cfg, double dt) {
  check_state(f, cfg);
  const double limit = micro_stable_dt(f, cfg);
  if (dt > limit * (1 + 1e-12)) throw StepRejected("micro step exceeds the stability bound", limit);
  const bool stiff = !cfg.options.implicit_viscosity;
  MicroFields u0 = f;
  fill_wall_rows(u0);
  fill_interface_rows(u0, central_x(u0.alpha, cfg.grid.dx()));
  const MicroFields u1 = rk_stage(0.0, u0, 1.0, u0, dt, cfg, stiff);
  const MicroFields u2 = rk_stage(0.75, u0, 0.25, u1, dt, cfg, stiff);
  MicroFields u3 = rk_stage(1.0 / 3.0, u0, 2.0 / 3.0, u2, dt, cfg, stiff);
  if (cfg.options.implicit_viscosity) implicit_viscous(u3, cfg, dt);
  check_state(u3, cfg);
  u3.time = f.time + dt;
  return u3;
}

int micro_run(MicroFields& f, const MicroConfig& cfg, double t_end) {
  int steps = 0;
  while (f.time < t_end * (1 - 1e-14)) {
    double dt = micro_stable_dt(f, cfg);
    bool last = false;
    if (f.time + dt >= t_end) {
      dt = t_end - f.time;
      last = true;
    }
    f = micro_step(f, cfg, dt);
    if (last) f.time = t_end;
    ++steps;
  }
  return steps;
}

}  // namespace stratavg
