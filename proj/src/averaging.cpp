#include "stratavg/averaging.hpp"

#include <algorithm>

#include "stratavg/errors.hpp"

namespace stratavg {

double vertical_average(const Eigen::Ref<const Eigen::ArrayXd>& column) { return column.mean(); }

double favre_average(const Eigen::Ref<const Eigen::ArrayXd>& rho, const Eigen::Ref<const Eigen::ArrayXd>& f) {
  return (rho * f).sum() / rho.sum();
}

AveragedFields average_fields(const MicroFields& f, const MicroConfig& cfg) {
  const int nx = f.nx();
  const double ds = 1.0 / f.ns();
  AveragedFields out;
  out.alpha1 = f.alpha;
  for (int k = 0; k < 2; ++k) {
    const Eigen::ArrayXXd rho = density(f, k);
    const Eigen::ArrayXXd p = layer_pressure(f, cfg, k);
    out.mass[k] = f.layer[k].mass.colwise().sum().transpose() * ds;
    out.momentum[k] = f.layer[k].xmom.colwise().sum().transpose() * ds;
    out.rho[k].resize(nx);
    out.pressure[k].resize(nx);
    for (int i = 0; i < nx; ++i) {
      out.rho[k](i) = vertical_average(rho.col(i));
      out.pressure[k](i) = vertical_average(p.col(i));
    }
    out.velocity[k] = out.momentum[k] / out.mass[k];
  }
  return out;
}

MacroGrid project_to_macro(const MacroModel& model, const MicroFields& f) {
  if (model.variant == ModelVariant::TwoVelocityNsf)
    throw DomainError("the micro solver is barotropic; project onto a barotropic model");
  const int nx = f.nx();
  const double ds = 1.0 / f.ns();
  MacroGrid g;
  g.dx = 1.0 / nx;
  g.U.resize(nx, model.num_vars());
  for (int k = 0; k < 2; ++k) g.U.col(k) = f.layer[k].mass.colwise().sum().transpose().matrix() * ds;
  if (model.variant == ModelVariant::OneVelocity) {
    g.U.col(2) = ((f.layer[0].xmom.colwise().sum() + f.layer[1].xmom.colwise().sum()).transpose() * ds).matrix();
  } else {
    for (int k = 0; k < 2; ++k) g.U.col(2 + k) = f.layer[k].xmom.colwise().sum().transpose().matrix() * ds;
  }
  g.alpha1 = f.alpha.matrix();
  return g;
}

EstimateDiagnostics estimate_diagnostics(const MicroFields& f, const MicroConfig& cfg) {
  const int nx = f.nx(), ns = f.ns();
  const AveragedFields avg = average_fields(f, cfg);
  EstimateDiagnostics d;
  for (int k = 0; k < 2; ++k) {
    const Eigen::ArrayXXd rho = density(f, k);
    const Eigen::ArrayXXd u = velocity(f, k);
    const Eigen::ArrayXXd p = layer_pressure(f, cfg, k);
    d.shear[k].resize(nx);
    d.interface_gap[k].resize(nx);
    d.tensor_gap[k].resize(nx);
    // interface row of the layer and its neighbour, for linear extrapolation to s = 0 or 1
    const int r0 = k == 0 ? ns - 1 : 0, r1 = k == 0 ? ns - 2 : 1;
    for (int i = 0; i < nx; ++i) {
      const double v = avg.velocity[k](i);
      d.shear[k](i) = (u.col(i) - v).abs().maxCoeff();
      const double p_itf = 1.5 * p(r0, i) - 0.5 * p(r1, i);
      d.interface_gap[k](i) = std::abs(p_itf - avg.pressure[k](i));
      d.tensor_gap[k](i) = std::abs(favre_average(rho.col(i), u.col(i) * u.col(i)) - v * v);
    }
  }
  d.pressure_gap = (avg.pressure[0] - avg.pressure[1]).abs();
  d.velocity_gap = (avg.velocity[0] - avg.velocity[1]).abs();
  return d;
}

std::array<double, 8> EstimateDiagnostics::sup() const {
  return {shear[0].maxCoeff(),      shear[1].maxCoeff(),      interface_gap[0].maxCoeff(),
          interface_gap[1].maxCoeff(), pressure_gap.maxCoeff(), tensor_gap[0].maxCoeff(),
          tensor_gap[1].maxCoeff(), velocity_gap.maxCoeff()};
}

}  // namespace stratavg
