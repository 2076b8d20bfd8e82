#pragma once

// Mode-discretised Gaussian-functional inner products: the semiclassical
// overlap of displaced sources and the exact overlap in the T00 eigenbasis.

#include <vector>

#include "qgphase/sources.hpp"

namespace qgphase::overlaps {

/// Per-mode data of exp(-(i/2 hbar) int pi_T h^T_E) Psi_vac on the FFT lattice.
struct ModeGaussianState {
  GridSpec grid;
  std::vector<cd> hT;                // kappa E(k) / |k|^2, zero at k = 0
  std::vector<cd> shift;             // hT / (2 hbar), the displacement phase coefficient
  std::vector<double> vacuum_variance;  // hbar |k| / (2 kappa) * mode weight; zero at k = 0
};

ModeGaussianState build_field_state(const EnergyDensity& e, const PhysicalConstants& k, const GridSpec& grid);

/// Gaussian vacuum average of the relative shift phase between two field
/// states: exp(-1/2 sum_k w^2 s^2(k) |shift_a(k) - shift_b(k)|^2), w the mode weight.
/// Exactly 1 when the shifts coincide.
double gravity_factor(const ModeGaussianState& a, const ModeGaussianState& b);

/// Largest per-mode |shift_a(k) - shift_b(k)|.
double max_shift_mismatch(const ModeGaussianState& a, const ModeGaussianState& b);

/// sum over shared eigenbasis indices of conj(psi_i) phi_i times the field
/// gravity factor of the paired eigen-densities.
cd exact_joint_overlap(const QuantumSourceState& psi, const QuantumSourceState& phi, const GridSpec& grid,
                       const PhysicalConstants& k);

struct SemiclassicalParams {
  double mass = 1.0;
  double matter_width = 0.1;  // coherent-state width of the matter wavepacket
  double sigma_reg = 0.0;     // 0: two grid cells
};

struct OverlapValue {
  double value = 0.0;
  double log_value = 0.0;  // kept separately since the product underflows quickly
  double field_log = 0.0;
  double matter_log = 0.0;
};

/// prod_k exp(-|dh(k)|^2 w_k / (4 w^2)) * |<alpha_x|alpha_{x+eps}>| with
/// dh(k) = (1 - e^{-i k.eps}) hT_x(k) and w_k the mode weight.
/// Throws DomainError for w <= 0 or eps outside the box.
OverlapValue semiclassical_overlap(const Vec3& x, const Vec3& eps, double w, const GridSpec& grid,
                                   const PhysicalConstants& k, const SemiclassicalParams& params);

}  // namespace qgphase::overlaps
