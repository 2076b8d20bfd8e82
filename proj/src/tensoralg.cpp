#include "qgphase/tensoralg.hpp"

#include <cmath>

#include <Eigen/Geometry>

namespace qgphase::tensoralg {

WaveVector::WaveVector(double kx, double ky, double kz) : k_{kx, ky, kz} {
  if (!std::isfinite(kx) || !std::isfinite(ky) || !std::isfinite(kz))
    throw DomainError("wavevector components must be finite");
}

double WaveVector::norm() const { return std::sqrt(norm2()); }

std::array<std::array<double, 3>, 3> matmul(const RealTensor& a, const RealTensor& b) {
  std::array<std::array<double, 3>, 3> m{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int l = 0; l < 3; ++l) m[i][j] += a(i, l) * b(l, j);
  return m;
}

RealTensor transverse_projector(const WaveVector& k) {
  const double k2 = k.norm2();
  if (!(k2 > 0.0)) throw DomainError("transverse projector undefined at k = 0");
  RealTensor p;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) p.at(i, j) = (i == j ? 1.0 : 0.0) - k[i] * k[j] / k2;
  return p;
}

std::array<double, 3> apply(const RealTensor& t, const WaveVector& k) {
  std::array<double, 3> v{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) v[i] += t(i, j) * k[j];
  return v;
}

RealTensor tt_polarisation(const WaveVector& k, int s) {
  const double kn = k.norm();
  if (!(kn > 0.0)) throw DomainError("polarisation undefined at k = 0");
  if (s != 0 && s != 1) throw DomainError("polarisation index must be 0 or 1");
  const Vec3 khat(k[0] / kn, k[1] / kn, k[2] / kn);
  // Seed with the axis least aligned with k.
  int axis = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(khat[i]) < std::abs(khat[axis])) axis = i;
  Vec3 seed = Vec3::Zero();
  seed[axis] = 1.0;
  const Vec3 u = (seed - seed.dot(khat) * khat).normalized();
  const Vec3 v = khat.cross(u);
  const double r = 1.0 / std::sqrt(2.0);
  RealTensor e;
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      e.at(i, j) = s == 0 ? r * (u[i] * u[j] - v[i] * v[j]) : r * (u[i] * v[j] + v[i] * u[j]);
    }
  }
  return e;
}

WaveVector lattice_wavevector(const GridSpec& grid, int ix, int iy, int iz) {
  return {grid.wavenumber(ix), grid.wavenumber(iy), grid.wavenumber(iz)};
}

SymTensorFieldK::SymTensorFieldK(GridSpec grid, std::vector<ComplexTensor> values, bool is_real)
    : grid_(grid), values_(std::move(values)), is_real_(is_real) {
  if (grid_.n <= 0 || !(grid_.length > 0.0)) throw DomainError("invalid grid spec");
  if (values_.size() != grid_.size()) throw DomainError("tensor field size does not match grid");
  if (!is_real_) return;
  double scale = 0.0;
  for (const auto& t : values_) scale = std::max(scale, t.max_abs());
  const double tol = 1e-12 * std::max(scale, 1e-300);
  const int n = grid_.n;
  for (int iz = 0; iz < n; ++iz) {
    for (int iy = 0; iy < n; ++iy) {
      for (int ix = 0; ix < n; ++ix) {
        const auto& a = at(ix, iy, iz);
        const auto& b = at(grid_.negated(ix), grid_.negated(iy), grid_.negated(iz));
        for (std::size_t c = 0; c < 6; ++c) {
          if (std::abs(a.components()[c] - std::conj(b.components()[c])) > tol)
            throw DomainError("reality flag set but F(-k) != conj(F(k))");
        }
      }
    }
  }
}

SymTensorFieldK SymTensorFieldK::zeros(GridSpec grid, bool is_real) {
  return {grid, std::vector<ComplexTensor>(grid.size()), is_real};
}

cd contract(const SymTensorFieldK& a, const SymTensorFieldK& b, const SpectralWeight& weight) {
  if (!(a.grid() == b.grid())) throw DomainError("contract: grid mismatch");
  const GridSpec& g = a.grid();
  const int n = g.n;
  cd sum = 0.0;
  for (int iz = 0; iz < n; ++iz) {
    for (int iy = 0; iy < n; ++iy) {
      for (int ix = 0; ix < n; ++ix) {
        if (ix == 0 && iy == 0 && iz == 0) continue;
        const WaveVector k = lattice_wavevector(g, ix, iy, iz);
        const double wk = weight ? weight(k) : 1.0;
        if (wk == 0.0) continue;
        const auto& bm = b.at(g.negated(ix), g.negated(iy), g.negated(iz));
        sum += wk * double_contract(a.at(ix, iy, iz), bm);
      }
    }
  }
  return sum * g.mode_weight();
}

}  // namespace qgphase::tensoralg
