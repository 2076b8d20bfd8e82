#pragma once

// Free-space Poisson solves for the transverse trace h^T sourced by an
// energy density, and Coulomb-kernel pair integrals.

#include <cstdint>
#include <string>
#include <vector>

#include "qgphase/sources.hpp"

namespace qgphase::poisson {

/// Mean of 1/r over a unit cube centred on the origin: 3 ln(2 + sqrt 3) - pi/2.
double cube_inverse_distance_mean();

/// Largest grid accepted by the direct quadrature.
inline constexpr int kDirectMaxN = 48;

/// Direct O(N^6) quadrature of kappa/(4 pi) int E(y)/|x - y| d^3y.
/// Throws NumericalGuardError above kDirectMaxN.
ScalarFieldX solve_hT_direct(const EnergyDensity& e, const PhysicalConstants& k, int n, double length);

/// Zero-padded (2N)^3 FFT convolution with the free-space kernel.
ScalarFieldX solve_hT_spectral(const EnergyDensity& e, const PhysicalConstants& k, int n, double length);

/// int E(y)/|x - y| d^3y on the grid, without the kappa/(4 pi) factor.
ScalarFieldX coulomb_potential_direct(const EnergyDensity& e, int n, double length);
ScalarFieldX coulomb_potential_spectral(const EnergyDensity& e, int n, double length);

/// Continuum transform of the trace solution, kappa E(k) / |k|^2, on the FFT
/// frequency lattice of `grid` (k = 0 entry set to 0). Analytic profiles use
/// their exact transform; grid profiles use the DFT with the centred-grid phase.
std::vector<cd> hT_fourier(const EnergyDensity& e, const PhysicalConstants& k, const GridSpec& grid);

enum class Backend { Spectral, Direct, MonteCarlo, Analytic };

std::string to_string(Backend b);
Backend backend_from_string(const std::string& s);

struct CoulombOptions {
  Backend backend = Backend::Spectral;
  int n = 32;
  double length = 1.0;
  std::uint64_t mc_samples = 1'000'000;
  std::uint64_t seed = 12345;
};

struct CoulombResult {
  double value = 0.0;      // int int E_A(x) E_B(y) / |x - y|
  double std_error = 0.0;  // Monte-Carlo standard error, 0 for deterministic backends
  Backend backend = Backend::Spectral;
};

/// Analytic backend: Gaussian and point profiles only; points are exact
/// deltas unless they carry an explicit regularisation width.
/// Throws DomainError for coincident exact points.
CoulombResult mutual_coulomb(const EnergyDensity& a, const EnergyDensity& b, const CoulombOptions& opt);

/// Closed form for two isotropic Gaussians (width 0 = point):
/// Q_A Q_B erf(d / sqrt(2 (sa^2 + sb^2))) / d.
double gaussian_pair_coulomb(double qa, double qb, double d, double sa, double sb);

}  // namespace qgphase::poisson
