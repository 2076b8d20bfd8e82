#include "qgphase/poisson.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "fft.hpp"
#include "qgphase/parallel.hpp"

namespace qgphase::poisson {

namespace {

constexpr double kPi = std::numbers::pi;

EnergyDensity griddify(const EnergyDensity& e, int n, double length) {
  return sample_on_grid(e, n, length);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Draws positions distributed as E / int E.
class DensitySampler {
 public:
  explicit DensitySampler(const EnergyDensity& e) : e_(e) {
    if (e.is_analytic()) {
      sigma_ = e.kind() == EnergyDensity::Kind::Point ? e.sigma_reg() : e.sigma();
    } else {
      cells_ = std::discrete_distribution<std::size_t>(e.values().begin(), e.values().end());
    }
  }

  Vec3 operator()(std::mt19937_64& rng) {
    if (e_.is_analytic()) {
      if (sigma_ == 0.0) return e_.center();
      return e_.center() + sigma_ * Vec3(normal_(rng), normal_(rng), normal_(rng));
    }
    const GridSpec& g = e_.grid();
    const std::size_t c = cells_(rng);
    const int n = g.n;
    const int ix = static_cast<int>(c % n);
    const int iy = static_cast<int>((c / n) % n);
    const int iz = static_cast<int>(c / (static_cast<std::size_t>(n) * n));
    const double h = g.spacing();
    return g.position(ix, iy, iz) + h * Vec3(uniform_(rng), uniform_(rng), uniform_(rng));
  }

 private:
  const EnergyDensity& e_;
  double sigma_ = 0.0;
  std::discrete_distribution<std::size_t> cells_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{-0.5, 0.5};
};

double analytic_width(const EnergyDensity& e) {
  return e.kind() == EnergyDensity::Kind::Point ? e.sigma_reg() : e.sigma();
}

CoulombResult monte_carlo(const EnergyDensity& a, const EnergyDensity& b, const CoulombOptions& opt) {
  const double qa = a.rest_energy();
  const double qb = b.rest_energy();
  CoulombResult r;
  r.backend = Backend::MonteCarlo;
  if (qa == 0.0 || qb == 0.0) return r;
  if (opt.mc_samples < 2) throw DomainError("Monte-Carlo budget must be at least 2 samples");
  constexpr std::size_t kChunks = 64;
  std::vector<double> sum(kChunks, 0.0), sum2(kChunks, 0.0);
  std::vector<std::uint64_t> count(kChunks, 0);
  parallel_for(kChunks, [&](std::size_t c) {
    const std::uint64_t lo = opt.mc_samples * c / kChunks;
    const std::uint64_t hi = opt.mc_samples * (c + 1) / kChunks;
    std::mt19937_64 rng(splitmix64(opt.seed ^ splitmix64(c)));
    DensitySampler sa(a), sb(b);
    double s = 0.0, s2 = 0.0;
    for (std::uint64_t i = lo; i < hi; ++i) {
      const double d = (sa(rng) - sb(rng)).norm();
      if (d == 0.0) throw DomainError("Monte-Carlo sample hit a coincident point pair");
      const double v = 1.0 / d;
      s += v;
      s2 += v * v;
    }
    sum[c] = s;
    sum2[c] = s2;
    count[c] = hi - lo;
  });
  double s = 0.0, s2 = 0.0;
  double n = 0.0;
  for (std::size_t c = 0; c < kChunks; ++c) {
    s += sum[c];
    s2 += sum2[c];
    n += static_cast<double>(count[c]);
  }
  const double mean = s / n;
  const double var = std::max(0.0, (s2 / n - mean * mean) * n / (n - 1.0));
  r.value = qa * qb * mean;
  r.std_error = qa * qb * std::sqrt(var / n);
  return r;
}

}  // namespace

double cube_inverse_distance_mean() {
  return 3.0 * std::log(2.0 + std::sqrt(3.0)) - kPi / 2.0;
}

ScalarFieldX coulomb_potential_direct(const EnergyDensity& e, int n, double length) {
  if (n > kDirectMaxN)
    throw NumericalGuardError("direct quadrature limited to N <= " + std::to_string(kDirectMaxN));
  const EnergyDensity g = griddify(e, n, length);
  const GridSpec grid = g.grid();
  const double h = grid.spacing();
  const int m = 2 * n - 1;
  // Kernel over all offsets (dx, dy, dz) in [-(n-1), n-1]^3.
  std::vector<double> kernel(static_cast<std::size_t>(m) * m * m);
  for (int dz = 0; dz < m; ++dz) {
    for (int dy = 0; dy < m; ++dy) {
      for (int dx = 0; dx < m; ++dx) {
        const double r = h * std::sqrt(static_cast<double>((dx - n + 1) * (dx - n + 1) +
                                                           (dy - n + 1) * (dy - n + 1) +
                                                           (dz - n + 1) * (dz - n + 1)));
        kernel[dx + static_cast<std::size_t>(m) * (dy + static_cast<std::size_t>(m) * dz)] =
            r > 0.0 ? 1.0 / r : cube_inverse_distance_mean() / h;
      }
    }
  }
  const auto& src = g.values();
  std::vector<char> row_live(static_cast<std::size_t>(n) * n, 0);
  for (int jz = 0; jz < n; ++jz)
    for (int jy = 0; jy < n; ++jy)
      for (int jx = 0; jx < n; ++jx)
        if (src[grid.index(jx, jy, jz)] != 0.0) row_live[jy + static_cast<std::size_t>(n) * jz] = 1;

  ScalarFieldX out{grid, std::vector<double>(grid.size(), 0.0)};
  const double dv = grid.cell_volume();
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t izs) {
    const int iz = static_cast<int>(izs);
    std::vector<double> acc(static_cast<std::size_t>(n) * n, 0.0);
    for (int jz = 0; jz < n; ++jz) {
      for (int jy = 0; jy < n; ++jy) {
        if (!row_live[jy + static_cast<std::size_t>(n) * jz]) continue;
        const double* srow = &src[grid.index(0, jy, jz)];
        for (int iy = 0; iy < n; ++iy) {
          const double* krow =
              &kernel[static_cast<std::size_t>(m) *
                      ((iy - jy + n - 1) + static_cast<std::size_t>(m) * (iz - jz + n - 1))];
          double* arow = &acc[static_cast<std::size_t>(n) * iy];
          for (int ix = 0; ix < n; ++ix) {
            const double* kk = krow + ix + n - 1;  // kk[-jx] = K(ix - jx)
            double s = 0.0;
            for (int jx = 0; jx < n; ++jx) s += srow[jx] * kk[-jx];
            arow[ix] += s;
          }
        }
      }
    }
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix)
        out.at(ix, iy, iz) = dv * acc[static_cast<std::size_t>(n) * iy + ix];
  });
  return out;
}

ScalarFieldX coulomb_potential_spectral(const EnergyDensity& e, int n, double length) {
  const EnergyDensity g = griddify(e, n, length);
  const GridSpec grid = g.grid();
  const double h = grid.spacing();
  const int m = 2 * n;
  const std::size_t total = static_cast<std::size_t>(m) * m * m;
  auto pidx = [m](int x, int y, int z) {
    return static_cast<std::size_t>(x) + static_cast<std::size_t>(m) * (y + static_cast<std::size_t>(m) * z);
  };
  std::vector<cd> kernel(total), rho(total, cd(0.0));
  for (int z = 0; z < m; ++z) {
    const int oz = z < n ? z : z - m;
    for (int y = 0; y < m; ++y) {
      const int oy = y < n ? y : y - m;
      for (int x = 0; x < m; ++x) {
        const int ox = x < n ? x : x - m;
        const double r = h * std::sqrt(static_cast<double>(ox * ox + oy * oy + oz * oz));
        kernel[pidx(x, y, z)] = r > 0.0 ? 1.0 / r : cube_inverse_distance_mean() / h;
      }
    }
  }
  for (int z = 0; z < n; ++z)
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) rho[pidx(x, y, z)] = g.values()[grid.index(x, y, z)];
  detail::dft3(kernel, m, FFTW_FORWARD);
  detail::dft3(rho, m, FFTW_FORWARD);
  for (std::size_t i = 0; i < total; ++i) rho[i] *= kernel[i];
  detail::dft3(rho, m, FFTW_BACKWARD);
  const double scale = grid.cell_volume() / static_cast<double>(total);
  ScalarFieldX out{grid, std::vector<double>(grid.size())};
  for (int z = 0; z < n; ++z)
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) out.at(x, y, z) = scale * rho[pidx(x, y, z)].real();
  return out;
}

ScalarFieldX solve_hT_direct(const EnergyDensity& e, const PhysicalConstants& k, int n, double length) {
  ScalarFieldX f = coulomb_potential_direct(e, n, length);
  const double pre = k.kappa() / (4.0 * kPi);
  for (double& v : f.values) v *= pre;
  return f;
}

ScalarFieldX solve_hT_spectral(const EnergyDensity& e, const PhysicalConstants& k, int n, double length) {
  ScalarFieldX f = coulomb_potential_spectral(e, n, length);
  const double pre = k.kappa() / (4.0 * kPi);
  for (double& v : f.values) v *= pre;
  return f;
}

std::vector<cd> hT_fourier(const EnergyDensity& e, const PhysicalConstants& k, const GridSpec& grid) {
  const int n = grid.n;
  std::vector<cd> out(grid.size());
  if (e.is_analytic()) {
    const double sigma = e.effective_sigma(grid);
    for (int iz = 0; iz < n; ++iz)
      for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
          const auto kv = tensoralg::lattice_wavevector(grid, ix, iy, iz);
          out[grid.index(ix, iy, iz)] = e.fourier(kv, sigma);
        }
  } else {
    if (!(e.grid() == grid)) throw DomainError("hT_fourier: density grid does not match");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = e.values()[i];
    detail::dft3(out, n, FFTW_FORWARD);
    const double dv = grid.cell_volume();
    for (int iz = 0; iz < n; ++iz)
      for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
          // x_i = (i - n/2) h contributes e^{i pi m} = (-1)^i per axis.
          const double sign = ((ix + iy + iz) % 2 == 0) ? 1.0 : -1.0;
          out[grid.index(ix, iy, iz)] *= sign * dv;
        }
  }
  const double kap = k.kappa();
  for (int iz = 0; iz < n; ++iz)
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        const auto kv = tensoralg::lattice_wavevector(grid, ix, iy, iz);
        auto& v = out[grid.index(ix, iy, iz)];
        v = kv.is_zero() ? cd(0.0) : kap * v / kv.norm2();
      }
  return out;
}

std::string to_string(Backend b) {
  switch (b) {
    case Backend::Spectral: return "spectral";
    case Backend::Direct: return "direct";
    case Backend::MonteCarlo: return "monte-carlo";
    case Backend::Analytic: return "analytic";
  }
  return "unknown";
}

Backend backend_from_string(const std::string& s) {
  if (s == "spectral") return Backend::Spectral;
  if (s == "direct") return Backend::Direct;
  if (s == "monte-carlo") return Backend::MonteCarlo;
  if (s == "analytic") return Backend::Analytic;
  throw ConfigError("unknown backend '" + s + "' (spectral | direct | monte-carlo | analytic)");
}

double gaussian_pair_coulomb(double qa, double qb, double d, double sa, double sb) {
  const double s2 = sa * sa + sb * sb;
  if (s2 == 0.0) {
    if (!(d > 0.0)) throw DomainError("coincident point sources");
    return qa * qb / d;
  }
  const double s = std::sqrt(s2);
  if (d < 1e-8 * s) return qa * qb * std::sqrt(2.0 / kPi) / s;
  return qa * qb * std::erf(d / (std::sqrt(2.0) * s)) / d;
}

CoulombResult mutual_coulomb(const EnergyDensity& a, const EnergyDensity& b, const CoulombOptions& opt) {
  CoulombResult r;
  r.backend = opt.backend;
  switch (opt.backend) {
    case Backend::Analytic: {
      if (!a.is_analytic() || !b.is_analytic())
        throw DomainError("analytic Coulomb backend needs point or gaussian profiles");
      r.value = gaussian_pair_coulomb(a.rest_energy(), b.rest_energy(), (a.center() - b.center()).norm(),
                                      analytic_width(a), analytic_width(b));
      return r;
    }
    case Backend::MonteCarlo:
      return monte_carlo(a, b, opt);
    case Backend::Spectral:
    case Backend::Direct: {
      const EnergyDensity ga = griddify(a, opt.n, opt.length);
      const ScalarFieldX phi = opt.backend == Backend::Spectral
                                   ? coulomb_potential_spectral(b, opt.n, opt.length)
                                   : coulomb_potential_direct(b, opt.n, opt.length);
      double s = 0.0;
      for (std::size_t i = 0; i < phi.values.size(); ++i) s += ga.values()[i] * phi.values[i];
      r.value = s * ga.grid().cell_volume();
      return r;
    }
  }
  return r;
}

}  // namespace qgphase::poisson
