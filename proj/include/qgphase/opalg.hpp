#pragma once

// Truncated-mode operator algebra: TT modes as finite oscillators, the
// field-probe interaction, nested commutators, Zassenhaus products and exact
// propagators, and relative-phase extraction between probe branches.
//
// Full space ordering is probe (outer) x field (inner); field modes are
// ordered with the first mode outermost.

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "qgphase/sources.hpp"
#include "qgphase/tensoralg.hpp"

namespace qgphase::opalg {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr int kMaxModes = 3;
inline constexpr Eigen::Index kMaxPropagatorDim = 4096;

struct TTMode {
  tensoralg::WaveVector k;
  int polarisation = 0;  // 0: plus, 1: cross
  int dim = 40;          // oscillator truncation D
};

class TruncatedModeSystem {
 public:
  /// mode_weight is the d^3k/(2 pi)^3 measure carried by each mode.
  TruncatedModeSystem(std::vector<TTMode> modes, double mode_weight, PhysicalConstants constants);

  const std::vector<TTMode>& modes() const { return modes_; }
  double mode_weight() const { return weight_; }
  const PhysicalConstants& constants() const { return k_; }
  Eigen::Index field_dim() const { return field_dim_; }
  double omega(std::size_t m) const;

  /// Single-mode D x D matrices of h and pi in the number basis.
  const Matrix& local_h(std::size_t m) const { return h_[m]; }
  const Matrix& local_pi(std::size_t m) const { return pi_[m]; }
  /// Mode operator embedded in the full field space.
  Matrix field_operator(std::size_t m, const Matrix& local) const;
  /// Max |[h, pi] - i hbar| over the lowest D - 2 levels.
  double commutator_defect(std::size_t m) const;
  /// TT polarisation tensor of mode m.
  tensoralg::RealTensor polarisation_tensor(std::size_t m) const;

 private:
  std::vector<TTMode> modes_;
  double weight_;
  PhysicalConstants k_;
  Eigen::Index field_dim_ = 1;
  std::vector<Matrix> h_, pi_;
};

/// Operator-valued probe stress tensor: per mode, the six component matrices
/// (xx, yy, zz, xy, xz, yz) acting on the probe space.
class ProbeStressTensor {
 public:
  ProbeStressTensor(int dim, std::vector<std::array<Matrix, 6>> coefficients);
  static ProbeStressTensor zero(int dim, std::size_t modes);
  /// Branch-diagonal probe: tensors[b][m] is the c-number tensor of branch b at mode m.
  static ProbeStressTensor from_branches(const std::vector<std::vector<tensoralg::RealTensor>>& tensors);

  int dim() const { return dim_; }
  std::size_t mode_count() const { return c_.size(); }
  const std::array<Matrix, 6>& coefficients(std::size_t m) const { return c_[m]; }
  /// sum_ij A_ij T_ij(m) as a probe matrix.
  Matrix contract(std::size_t m, const tensoralg::RealTensor& a) const;

 private:
  int dim_;
  std::vector<std::array<Matrix, 6>> c_;
};

/// sum_m (kappa / w) pi_m^2 + (k^2 w c^2 / 4 kappa) h_m^2, on field x probe.
Matrix build_HG(const TruncatedModeSystem& s, int probe_dim = 1);

/// -(w/2) sum_m h_m (e_m : T_m) - (w/4) sum_m hT_m (P : T_m), the second
/// term acting as identity on the field. Throws DomainError on mode mismatch.
Matrix build_HI(const TruncatedModeSystem& s, const ProbeStressTensor& tp, const std::vector<double>& hT_shift);

/// Probe free energies as diag(E) x field identity.
Matrix build_Hfree(const TruncatedModeSystem& s, const std::vector<double>& probe_energies);

Matrix commutator(const Matrix& a, const Matrix& b);

struct NestedCommutators {
  Matrix gi;    // [H_G, H_I]
  Matrix ggi;   // [H_G, [H_G, H_I]]
  Matrix igi;   // [H_I, [H_G, H_I]]
};

NestedCommutators nested_commutators(const Matrix& hg, const Matrix& hi);

/// exp(i s H) for Hermitian H.
Matrix expi_hermitian(const Matrix& h, double s);

/// e^{-itHf/hbar} e^{-itHG/hbar} e^{-itHI/hbar} e^{t^2 [G,I]/2hbar^2}
///   e^{(it^3/6hbar^3)([G,[G,I]] + 2[I,[G,I]])}, truncated after `order` groups (1..3).
Matrix zassenhaus_product(const Matrix& hg, const Matrix& hi, const Matrix& hfree, double t, double hbar,
                          int order = 3);
Matrix zassenhaus_product(const Matrix& hg, const Matrix& hi, const Matrix& hfree, const NestedCommutators& c,
                          double t, double hbar, int order = 3);

/// Dense e^{-itH/hbar}; throws NumericalGuardError above kMaxPropagatorDim.
Matrix exact_propagator(const Matrix& h, double t, double hbar);

double operator_norm(const Matrix& a);

/// Common eigenbasis of all probe coefficient matrices (columns). Throws
/// DomainError "branch basis undefined" when they do not commute.
Matrix branch_basis(const ProbeStressTensor& tp);

struct BranchPrediction {
  double theta0_phase = 0.0;
  double theta0_damping = 0.0;  // d; the amplitude carries e^{-d / hbar}
  double theta1 = 0.0;
  double theta2 = 0.0;
};

/// Per-branch mode sums (measure w, phases in radians):
///   theta0_phase  = -(t / 4 hbar) w sum hT (P:T)
///   theta0_damping = -(kappa t^2 w / 8) sum (T:T - 2 Tt:Tt) / (c |k|)
///   theta1 = (kappa t^3 w / 8 hbar) sum T:T,  theta2 = (kappa t^3 w / 6 hbar) sum Tt:Tt
/// with Tt the TT projection of T at each mode.
std::vector<BranchPrediction> predict_theta(const TruncatedModeSystem& s, const ProbeStressTensor& tp,
                                            const std::vector<double>& hT_shift, double t);

struct RelativePhase {
  double phase = 0.0;          // arg(amp_b / amp_a)
  double log_magnitude = 0.0;  // log|amp_b| - log|amp_a|
};

/// amp_s = <s x f | U | s x f> for probe branch vectors a, b and field state f.
/// Throws DomainError "branch suppressed" below 1e-12.
RelativePhase extract_relative_phase(const Matrix& u, const Vector& field_state, const Vector& branch_a,
                                     const Vector& branch_b);

/// Number-basis vacuum |0...0> of the field.
Vector field_vacuum(const TruncatedModeSystem& s);

struct PropagatorComparison {
  double t = 0.0;
  double deviation = 0.0;
  RelativePhase exact;
  double predicted_phase = 0.0;        // free + theta0 + theta1 + theta2 (difference b - a)
  double predicted_log_magnitude = 0.0;
};

PropagatorComparison compare_propagators(const TruncatedModeSystem& s, const ProbeStressTensor& tp,
                                         const std::vector<double>& hT_shift,
                                         const std::vector<double>& probe_energies, double t,
                                         std::size_t branch_a = 0, std::size_t branch_b = 1, int order = 3);

}  // namespace qgphase::opalg
