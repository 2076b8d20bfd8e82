#pragma once

// Entangling phases of general quantum sources and of the competing models
// (Newton, nonlocal coupling, Schroedinger-Newton), phase matrices over
// eigenbasis pairs, and entanglement negativity.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qgphase/poisson.hpp"
#include "qgphase/sources.hpp"

namespace qgphase::phases {

struct PhaseValue {
  double phase = 0.0;      // radians, not reduced mod 2 pi
  double std_error = 0.0;  // Monte-Carlo standard error, 0 otherwise
};

enum class Model { General, Newton, Nonlocal, SchroedingerNewton };

std::string to_string(Model m);

/// Complex log-amplitudes: real part is the damping magnitude, imaginary
/// part the phase, indexed by (branch of A, branch of B).
struct PhaseMatrix {
  Model model = Model::General;
  Eigen::MatrixXcd theta;
  Eigen::MatrixXd std_error;  // per-entry uncertainty of the phase

  Eigen::MatrixXd phases() const { return theta.imag(); }
  Eigen::MatrixXd damping() const { return theta.real(); }
};

/// -(kappa t / 4 pi hbar) int int E_A E_B / |x - y|.
PhaseValue theta_AB(const EnergyDensity& a, const EnergyDensity& b, double t, const PhysicalConstants& k,
                    const poisson::CoulombOptions& opt);

struct EnergyValue {
  double value = 0.0;
  double std_error = 0.0;
};

/// -(kappa / 8 pi) int int E E / |x - y|.
EnergyValue self_energy(const EnergyDensity& e, const PhysicalConstants& k, const poisson::CoulombOptions& opt);

/// theta_AB / Newton phase for point pairs: -kappa c^4 / (4 pi G) (= -4).
double newton_prefactor_ratio(const PhysicalConstants& k);
/// nonlocal phase / theta_AB: -4 pi G / (kappa c^4) (= -1/4).
double nonlocal_prefactor_ratio(const PhysicalConstants& k);

/// Theta_ij = +G m_A m_B t / (hbar |x_i - x_j|). Throws DomainError for
/// coincident centres.
PhaseMatrix newton_phase(const LocalizedSourceSpec& a, const LocalizedSourceSpec& b, double t,
                         const PhysicalConstants& k);

/// -V_Nloc t / hbar with the T00-dominated trace: +(G / c^4)(t / hbar) int int E_A E_B / |x - y|.
PhaseValue nonlocal_phase(const EnergyDensity& a, const EnergyDensity& b, double t, const PhysicalConstants& k,
                          const poisson::CoulombOptions& opt);

/// Mean-field phase: Theta_ij = u_i + v_j with
/// u_i = (G t / hbar c^4) sum_j |d_j|^2 C_ij and v_j = (G t / hbar c^4) sum_i |c_i|^2 C_ij,
/// C_ij the Coulomb integral between branch densities.
PhaseMatrix sn_phase(const QuantumSourceState& a, const QuantumSourceState& b, double t,
                     const PhysicalConstants& k, const poisson::CoulombOptions& opt);

/// Theta_ij = theta_AB(E_i, E_j, t) over the eigen-densities of the two states.
PhaseMatrix phase_matrix_general(const QuantumSourceState& a, const QuantumSourceState& b, double t,
                                 const PhysicalConstants& k, const poisson::CoulombOptions& opt);

/// Entanglement negativity of the normalised state sum c_i d_j e^{Theta_ij}.
/// Throws DomainError on shape mismatch or a zero state.
double negativity(const std::vector<cd>& ca, const std::vector<cd>& cb, const Eigen::MatrixXcd& theta);

struct PhaseRequest {
  LocalizedSourceSpec source_a;
  LocalizedSourceSpec source_b;
  double t = 0.0;
  PhysicalConstants constants;
  poisson::CoulombOptions coulomb;
  /// Width ladder, as fractions of the nearest branch separation, for the
  /// narrow-width convergence table; empty disables the table.
  std::vector<double> convergence_fractions;
};

struct ModelRow {
  Model model;
  std::optional<PhaseMatrix> matrix;  // empty when skipped
  double negativity = 0.0;
  std::string skip_reason;
};

struct ConvergenceRow {
  double sigma = 0.0;
  double theta = 0.0;            // general phase of the nearest branch pair
  double newton_scaled = 0.0;    // prefactor-normalised Newton phase of the same pair
  double relative_deviation = 0.0;
  double std_error = 0.0;
};

struct PhaseReport {
  std::vector<ModelRow> models;
  /// Largest |general - ratio * Newton| / |general| over entries.
  double general_vs_newton = 0.0;
  /// Largest |general - nonlocal / nonlocal_ratio| / |general| over entries.
  double general_vs_nonlocal = 0.0;
  /// Largest |general - SN| / |general| over entries.
  double general_vs_sn = 0.0;
  double newton_ratio = 0.0;
  double nonlocal_ratio = 0.0;
  std::vector<EnergyValue> self_energy_a;
  std::vector<EnergyValue> self_energy_b;
  std::vector<ConvergenceRow> convergence;
  std::string vacuum_note;
  std::string classical_quantum_note;

  const ModelRow& row(Model m) const;
};

PhaseReport compare_models(const PhaseRequest& request);

/// Branch pair (i, j) with the smallest centre separation.
std::pair<std::size_t, std::size_t> nearest_pair(const LocalizedSourceSpec& a, const LocalizedSourceSpec& b);

/// Same centres and amplitudes with every branch width replaced by `sigma`.
LocalizedSourceSpec with_width(const LocalizedSourceSpec& s, double sigma);

}  // namespace qgphase::phases
