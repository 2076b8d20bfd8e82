#include "qgphase/overlaps.hpp"

#include <cmath>

#include "qgphase/poisson.hpp"

namespace qgphase::overlaps {

ModeGaussianState build_field_state(const EnergyDensity& e, const PhysicalConstants& k, const GridSpec& grid) {
  ModeGaussianState s;
  s.grid = grid;
  s.hT = poisson::hT_fourier(e, k, grid);
  s.shift.resize(s.hT.size());
  s.vacuum_variance.assign(s.hT.size(), 0.0);
  const double weight = grid.mode_weight();
  const int n = grid.n;
  for (int iz = 0; iz < n; ++iz)
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        const std::size_t i = grid.index(ix, iy, iz);
        s.shift[i] = s.hT[i] / (2.0 * k.hbar);
        const auto kv = tensoralg::lattice_wavevector(grid, ix, iy, iz);
        if (!kv.is_zero()) s.vacuum_variance[i] = k.hbar * kv.norm() * weight / (2.0 * k.kappa());
      }
  return s;
}

double max_shift_mismatch(const ModeGaussianState& a, const ModeGaussianState& b) {
  if (!(a.grid == b.grid)) throw DomainError("field states on different grids");
  double m = 0.0;
  for (std::size_t i = 0; i < a.shift.size(); ++i) m = std::max(m, std::abs(a.shift[i] - b.shift[i]));
  return m;
}

double gravity_factor(const ModeGaussianState& a, const ModeGaussianState& b) {
  if (!(a.grid == b.grid)) throw DomainError("field states on different grids");
  const double w = a.grid.mode_weight();
  double expo = 0.0;
  for (std::size_t i = 0; i < a.shift.size(); ++i) {
    const cd d = a.shift[i] - b.shift[i];
    if (d == cd(0.0)) continue;
    expo += w * w * a.vacuum_variance[i] * std::norm(d);
  }
  return std::exp(-0.5 * expo);
}

cd exact_joint_overlap(const QuantumSourceState& psi, const QuantumSourceState& phi, const GridSpec& grid,
                       const PhysicalConstants& k) {
  cd s = 0.0;
  for (const auto& a : psi.components()) {
    for (const auto& b : phi.components()) {
      if (a.index != b.index) continue;  // <E'|E> = 0
      const auto fa = build_field_state(a.density, k, grid);
      const auto fb = build_field_state(b.density, k, grid);
      s += std::conj(a.amplitude) * b.amplitude * gravity_factor(fa, fb);
    }
  }
  return s;
}

OverlapValue semiclassical_overlap(const Vec3& x, const Vec3& eps, double w, const GridSpec& grid,
                                   const PhysicalConstants& k, const SemiclassicalParams& params) {
  if (!(w > 0.0)) throw DomainError("regularisation width w must be positive");
  if (!(params.matter_width > 0.0)) throw DomainError("matter width must be positive");
  for (int a = 0; a < 3; ++a) {
    if (std::abs(x[a] + eps[a]) >= 0.5 * grid.length || std::abs(x[a]) >= 0.5 * grid.length)
      throw DomainError("displaced source leaves the box");
  }
  const EnergyDensity src = EnergyDensity::point(params.mass, x, k, params.sigma_reg);
  const std::vector<cd> h = poisson::hT_fourier(src, k, grid);
  const double weight = grid.mode_weight();
  const int n = grid.n;
  double field_log = 0.0;
  for (int iz = 0; iz < n; ++iz)
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        const auto kv = tensoralg::lattice_wavevector(grid, ix, iy, iz);
        if (kv.is_zero()) continue;
        const cd dh = (1.0 - std::polar(1.0, -kv.dot(eps))) * h[grid.index(ix, iy, iz)];
        field_log -= std::norm(dh) * weight / (4.0 * w * w);
      }
  OverlapValue out;
  out.field_log = field_log;
  out.matter_log = -eps.squaredNorm() / (8.0 * params.matter_width * params.matter_width);
  out.log_value = out.field_log + out.matter_log;
  out.value = std::exp(out.log_value);
  return out;
}

}  // namespace qgphase::overlaps
