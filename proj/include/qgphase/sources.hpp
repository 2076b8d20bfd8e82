#pragma once

// Energy densities (eigenvalues of T00) and quantum source states built as
// finite spectral decompositions over them.

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "qgphase/errors.hpp"
#include "qgphase/grid.hpp"
#include "qgphase/tensoralg.hpp"

namespace qgphase {

using cd = std::complex<double>;

struct PhysicalConstants {
  double G = 0.0;
  double c = 0.0;
  double hbar = 0.0;

  PhysicalConstants() = default;
  /// Throws DomainError unless all three are strictly positive and finite.
  PhysicalConstants(double G, double c, double hbar);

  static PhysicalConstants si();
  double kappa() const;
};

/// Mass and length scales defining the internal natural units (c = 1).
/// Energy is measured in mass_scale*c^2 and time in length_scale/c.
struct UnitSystem {
  double mass_scale = 1.0;    // kg
  double length_scale = 1.0;  // m

  PhysicalConstants natural_constants(const PhysicalConstants& si) const;
  double mass_to_natural(double kg) const { return kg / mass_scale; }
  double length_to_natural(double m) const { return m / length_scale; }
  double time_to_natural(double s, const PhysicalConstants& si) const {
    return s * si.c / length_scale;
  }
  double energy_to_si(double e, const PhysicalConstants& si) const {
    return e * mass_scale * si.c * si.c;
  }
};

class EnergyDensity {
 public:
  enum class Kind { Point, Gaussian, Grid };

  /// Point mass; realised as a Gaussian of width `sigma_reg` on a grid.
  /// sigma_reg = 0 selects the default of two grid cells at sampling time.
  static EnergyDensity point(double mass, const Vec3& center, const PhysicalConstants& k,
                             double sigma_reg = 0.0);
  static EnergyDensity gaussian(double mass, const Vec3& center, double sigma,
                                const PhysicalConstants& k);
  /// Grid values in energy/volume; must be finite and non-negative.
  static EnergyDensity on_grid(GridSpec grid, std::vector<double> values);
  static EnergyDensity zero(GridSpec grid);

  Kind kind() const { return kind_; }
  bool is_analytic() const { return kind_ != Kind::Grid; }
  /// Total rest energy m c^2 (exact for analytic profiles, discrete sum for grids).
  double rest_energy() const;
  const Vec3& center() const { return center_; }
  double sigma() const { return sigma_; }
  double sigma_reg() const { return sigma_; }
  /// Width used when sampling on `grid` (resolves the point default).
  double effective_sigma(const GridSpec& grid) const;
  const GridSpec& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }

  /// Analytic profile value at x (uses effective width `sigma_eff` for points).
  double value(const Vec3& x, double sigma_eff) const;
  /// Continuum Fourier transform  int E(x) e^{-i k.x} d^3x  of an analytic profile.
  cd fourier(const tensoralg::WaveVector& k, double sigma_eff) const;

  EnergyDensity scaled(double a) const;

 private:
  Kind kind_ = Kind::Grid;
  double energy_ = 0.0;
  Vec3 center_ = Vec3::Zero();
  double sigma_ = 0.0;
  GridSpec grid_{};
  std::vector<double> values_;
};

/// Sum of two grid-form densities on the same grid.
EnergyDensity operator+(const EnergyDensity& a, const EnergyDensity& b);

/// Samples an analytic profile (or validates a grid profile) on an n^3 box of
/// side L, renormalising so that sum * cell volume equals m c^2.
EnergyDensity sample_on_grid(const EnergyDensity& e, int n, double length);

double total_mass(const EnergyDensity& e, const PhysicalConstants& k);

struct SourceComponent {
  cd amplitude;
  std::size_t index;  // eigenbasis label; equality of densities is decided by it
  EnergyDensity density;
};

class QuantumSourceState {
 public:
  /// Throws DomainError for an empty list, duplicate indices, or amplitudes
  /// whose squared norm differs from 1 by more than 1e-12.
  explicit QuantumSourceState(std::vector<SourceComponent> components);
  /// Rescales amplitudes to unit norm first.
  static QuantumSourceState normalised(std::vector<SourceComponent> components);

  const std::vector<SourceComponent>& components() const { return components_; }
  std::size_t size() const { return components_.size(); }
  std::vector<cd> amplitudes() const;

 private:
  std::vector<SourceComponent> components_;
};

/// sum_i conj(psi_i) phi_i over shared eigenbasis indices.
cd source_overlap(const QuantumSourceState& psi, const QuantumSourceState& phi);

struct LocalizedBranch {
  cd amplitude;
  Vec3 center;
  double sigma;  // 0: point branch
};

/// Superposition of semiclassical localised states of one particle.
class LocalizedSourceSpec {
 public:
  LocalizedSourceSpec(double mass, std::vector<LocalizedBranch> branches);

  double mass() const { return mass_; }
  const std::vector<LocalizedBranch>& branches() const { return branches_; }
  std::vector<cd> amplitudes() const;
  /// Each branch becomes one eigen-density, labelled first_index + i.
  QuantumSourceState to_state(const PhysicalConstants& k, std::size_t first_index = 0) const;
  EnergyDensity branch_density(std::size_t i, const PhysicalConstants& k) const;

 private:
  double mass_;
  std::vector<LocalizedBranch> branches_;
};

/// Position-space scalar field on a grid.
struct ScalarFieldX {
  GridSpec grid;
  std::vector<double> values;

  double& at(int ix, int iy, int iz) { return values[grid.index(ix, iy, iz)]; }
  double at(int ix, int iy, int iz) const { return values[grid.index(ix, iy, iz)]; }
};

/// Grid file pair: `<base>.json` header {N, L, units, mass} plus `<base>.bin`
/// holding N^3 little-endian float64 values, x fastest.
struct GridHeader {
  int n = 0;
  double length = 0.0;
  std::string units;
  double mass = 0.0;
};

void write_grid(const std::string& base, const GridHeader& header, const std::vector<double>& values);
std::vector<double> read_grid(const std::string& base, GridHeader& header);

}  // namespace qgphase
