#include "qgphase/opalg.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/KroneckerProduct>

namespace qgphase::opalg {

namespace {

Matrix identity(Eigen::Index n) { return Matrix::Identity(n, n); }

Matrix hermitian_part(const Matrix& h) { return 0.5 * (h + h.adjoint()); }

void check_hermitian(const Matrix& m, const char* what) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw DomainError(std::string(what) + " must be Hermitian");
}

double mode_frequency(const TTMode& m, const PhysicalConstants& k) { return k.c * m.k.norm(); }

}  // namespace

TruncatedModeSystem::TruncatedModeSystem(std::vector<TTMode> modes, double mode_weight,
                                         PhysicalConstants constants)
    : modes_(std::move(modes)), weight_(mode_weight), k_(constants) {
  if (modes_.empty()) throw DomainError("truncated system needs at least one mode");
  if (static_cast<int>(modes_.size()) > kMaxModes)
    throw NumericalGuardError("at most " + std::to_string(kMaxModes) + " modes are supported");
  if (!(weight_ > 0.0)) throw DomainError("mode weight must be positive");
  const double kappa = k_.kappa();
  const double hbar = k_.hbar;
  for (const auto& m : modes_) {
    if (m.k.is_zero()) throw DomainError("TT mode needs a non-zero wavevector");
    if (m.dim < 3) throw DomainError("oscillator truncation must be at least 3");
    if (m.polarisation != 0 && m.polarisation != 1) throw DomainError("polarisation index must be 0 or 1");
    field_dim_ *= m.dim;
    const double omega = mode_frequency(m, k_);
    const double mass = weight_ / (2.0 * kappa);  // from the kappa/w pi^2 kinetic term
    const double h0 = std::sqrt(hbar / (2.0 * mass * omega));
    const double p0 = std::sqrt(hbar * mass * omega / 2.0);
    Matrix a = Matrix::Zero(m.dim, m.dim);
    for (int n = 1; n < m.dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    h_.push_back(h0 * (a + a.adjoint()));
    pi_.push_back(cd(0.0, p0) * (a.adjoint() - a));
  }
  if (field_dim_ > kMaxPropagatorDim) throw NumericalGuardError("field dimension exceeds dense limit");
}

double TruncatedModeSystem::omega(std::size_t m) const { return mode_frequency(modes_.at(m), k_); }

Matrix TruncatedModeSystem::field_operator(std::size_t m, const Matrix& local) const {
  Eigen::Index before = 1, after = 1;
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    if (i < m) before *= modes_[i].dim;
    if (i > m) after *= modes_[i].dim;
  }
  const Matrix inner = Eigen::kroneckerProduct(local, identity(after)).eval();
  return Eigen::kroneckerProduct(identity(before), inner).eval();
}

double TruncatedModeSystem::commutator_defect(std::size_t m) const {
  const Matrix c = h_.at(m) * pi_.at(m) - pi_.at(m) * h_.at(m);
  const Eigen::Index low = modes_.at(m).dim - 2;
  const Matrix target = cd(0.0, k_.hbar) * identity(low);
  return (c.topLeftCorner(low, low) - target).cwiseAbs().maxCoeff();
}

tensoralg::RealTensor TruncatedModeSystem::polarisation_tensor(std::size_t m) const {
  return tensoralg::tt_polarisation(modes_.at(m).k, modes_.at(m).polarisation);
}

ProbeStressTensor::ProbeStressTensor(int dim, std::vector<std::array<Matrix, 6>> coefficients)
    : dim_(dim), c_(std::move(coefficients)) {
  if (dim_ < 1) throw DomainError("probe dimension must be positive");
  for (const auto& mode : c_) {
    for (const auto& m : mode) {
      if (m.rows() != dim_ || m.cols() != dim_) throw DomainError("probe coefficient has wrong shape");
      check_hermitian(m, "probe stress coefficient");
    }
  }
}

ProbeStressTensor ProbeStressTensor::zero(int dim, std::size_t modes) {
  std::array<Matrix, 6> z;
  for (auto& m : z) m = Matrix::Zero(dim, dim);
  return {dim, std::vector<std::array<Matrix, 6>>(modes, z)};
}

ProbeStressTensor ProbeStressTensor::from_branches(
    const std::vector<std::vector<tensoralg::RealTensor>>& tensors) {
  if (tensors.empty()) throw DomainError("probe needs at least one branch");
  const int dim = static_cast<int>(tensors.size());
  const std::size_t modes = tensors.front().size();
  ProbeStressTensor p = zero(dim, modes);
  for (int b = 0; b < dim; ++b) {
    if (tensors[b].size() != modes) throw DomainError("branches disagree on mode count");
    for (std::size_t m = 0; m < modes; ++m)
      for (std::size_t c = 0; c < 6; ++c) p.c_[m][c](b, b) = tensors[b][m].components()[c];
  }
  return p;
}

Matrix ProbeStressTensor::contract(std::size_t m, const tensoralg::RealTensor& a) const {
  const auto& ac = a.components();
  const auto& cm = c_.at(m);
  Matrix out = Matrix::Zero(dim_, dim_);
  for (std::size_t c = 0; c < 6; ++c) out += (c < 3 ? 1.0 : 2.0) * ac[c] * cm[c];  // off-diagonals count twice
  return out;
}

Matrix build_HG(const TruncatedModeSystem& s, int probe_dim) {
  const double kappa = s.constants().kappa();
  const double w = s.mode_weight();
  const double c = s.constants().c;
  Matrix hf = Matrix::Zero(s.field_dim(), s.field_dim());
  for (std::size_t m = 0; m < s.modes().size(); ++m) {
    const double k2 = s.modes()[m].k.norm2();
    const Matrix local = (kappa / w) * s.local_pi(m) * s.local_pi(m) +
                         (k2 * w * c * c / (4.0 * kappa)) * s.local_h(m) * s.local_h(m);
    hf += s.field_operator(m, hermitian_part(local));
  }
  return Eigen::kroneckerProduct(identity(probe_dim), hf).eval();
}

Matrix build_HI(const TruncatedModeSystem& s, const ProbeStressTensor& tp, const std::vector<double>& hT_shift) {
  if (tp.mode_count() != s.modes().size()) throw DomainError("probe stress tensor mode count mismatch");
  if (hT_shift.size() != s.modes().size()) throw DomainError("trace shift count mismatch");
  const double w = s.mode_weight();
  const Eigen::Index fd = s.field_dim();
  Matrix hi = Matrix::Zero(tp.dim() * fd, tp.dim() * fd);
  for (std::size_t m = 0; m < s.modes().size(); ++m) {
    const Matrix tau = tp.contract(m, s.polarisation_tensor(m));
    const Matrix trace = tp.contract(m, tensoralg::transverse_projector(s.modes()[m].k));
    const Matrix hm = s.field_operator(m, s.local_h(m));
    hi += -0.5 * w * Eigen::kroneckerProduct(tau, hm).eval();
    hi += -0.25 * w * hT_shift[m] * Eigen::kroneckerProduct(trace, identity(fd)).eval();
  }
  return hermitian_part(hi);
}

Matrix build_Hfree(const TruncatedModeSystem& s, const std::vector<double>& probe_energies) {
  Eigen::VectorXcd e(static_cast<Eigen::Index>(probe_energies.size()));
  for (std::size_t i = 0; i < probe_energies.size(); ++i) e(static_cast<Eigen::Index>(i)) = probe_energies[i];
  const Matrix d = e.asDiagonal();
  return Eigen::kroneckerProduct(d, identity(s.field_dim())).eval();
}

Matrix commutator(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DomainError("commutator: shape mismatch");
  return a * b - b * a;
}

NestedCommutators nested_commutators(const Matrix& hg, const Matrix& hi) {
  NestedCommutators c;
  c.gi = commutator(hg, hi);
  c.ggi = commutator(hg, c.gi);
  c.igi = commutator(hi, c.gi);
  return c;
}

Matrix expi_hermitian(const Matrix& h, double s) {
  if (s == 0.0) return identity(h.rows());
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(h));
  if (es.info() != Eigen::Success) throw NumericalGuardError("eigen-decomposition failed");
  Eigen::VectorXcd phase(h.rows());
  for (Eigen::Index i = 0; i < h.rows(); ++i) phase(i) = std::polar(1.0, s * es.eigenvalues()(i));
  return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

Matrix zassenhaus_product(const Matrix& hg, const Matrix& hi, const Matrix& hfree, const NestedCommutators& c,
                          double t, double hbar, int order) {
  if (order < 1 || order > 3) throw DomainError("Zassenhaus order must be 1, 2 or 3");
  Matrix u = expi_hermitian(hfree, -t / hbar) * expi_hermitian(hg, -t / hbar) * expi_hermitian(hi, -t / hbar);
  if (order >= 2) {
    // [G, I] is anti-Hermitian: e^{a [G,I]} = e^{i a K} with K = -i [G,I].
    const Matrix k = cd(0.0, -1.0) * c.gi;
    u = u * expi_hermitian(k, t * t / (2.0 * hbar * hbar));
  }
  if (order >= 3) {
    const Matrix third = c.ggi + 2.0 * c.igi;
    u = u * expi_hermitian(third, t * t * t / (6.0 * hbar * hbar * hbar));
  }
  return u;
}

Matrix zassenhaus_product(const Matrix& hg, const Matrix& hi, const Matrix& hfree, double t, double hbar,
                          int order) {
  return zassenhaus_product(hg, hi, hfree, nested_commutators(hg, hi), t, hbar, order);
}

Matrix exact_propagator(const Matrix& h, double t, double hbar) {
  if (h.rows() > kMaxPropagatorDim) throw NumericalGuardError("propagator dimension above dense limit");
  return expi_hermitian(h, -t / hbar);
}

double operator_norm(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

Matrix branch_basis(const ProbeStressTensor& tp) {
  std::vector<const Matrix*> all;
  for (std::size_t m = 0; m < tp.mode_count(); ++m)
    for (const auto& c : tp.coefficients(m)) all.push_back(&c);
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      const double scale = std::max(1.0, all[i]->norm() * all[j]->norm());
      if (commutator(*all[i], *all[j]).norm() > 1e-10 * scale) throw DomainError("branch basis undefined");
    }
  bool diagonal = true;
  for (const auto* c : all) {
    Matrix d = *c;
    d.diagonal().setZero();
    if (d.norm() != 0.0) diagonal = false;
  }
  if (diagonal) return identity(tp.dim());
  // A generic real combination separates every joint eigenspace.
  Matrix mix = Matrix::Zero(tp.dim(), tp.dim());
  double w = 0.5;
  for (const auto* c : all) {
    w = std::fmod(w + 0.6180339887498949, 1.0);
    mix += (0.25 + w) * *c;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(mix));
  const Matrix v = es.eigenvectors();
  for (const auto* c : all) {
    Matrix d = v.adjoint() * *c * v;
    d.diagonal().setZero();
    if (d.norm() > 1e-10 * std::max(1.0, c->norm())) throw DomainError("branch basis undefined");
  }
  return v;
}

std::vector<BranchPrediction> predict_theta(const TruncatedModeSystem& s, const ProbeStressTensor& tp,
                                            const std::vector<double>& hT_shift, double t) {
  if (tp.mode_count() != s.modes().size() || hT_shift.size() != s.modes().size())
    throw DomainError("mode count mismatch");
  const Matrix v = branch_basis(tp);
  const double kappa = s.constants().kappa();
  const double hbar = s.constants().hbar;
  const double w = s.mode_weight();
  std::vector<BranchPrediction> out(static_cast<std::size_t>(tp.dim()));
  for (Eigen::Index b = 0; b < tp.dim(); ++b) {
    const Vector col = v.col(b);
    BranchPrediction p;
    for (std::size_t m = 0; m < s.modes().size(); ++m) {
      std::array<double, 6> comp{};
      for (std::size_t c = 0; c < 6; ++c) comp[c] = (col.adjoint() * tp.coefficients(m)[c] * col)(0, 0).real();
      const auto tm = tensoralg::RealTensor::from_components(comp[0], comp[1], comp[2], comp[3], comp[4], comp[5]);
      const auto& kv = s.modes()[m].k;
      const auto tt = tensoralg::tt_project(tm, kv);
      const double tdt = tensoralg::double_contract(tm, tm);
      const double ttt = tensoralg::double_contract(tt, tt);
      const double trace = tensoralg::double_contract(tensoralg::transverse_projector(kv), tm);
      p.theta0_phase += -(t / (4.0 * hbar)) * w * hT_shift[m] * trace;
      p.theta0_damping += -(kappa * t * t * w / 8.0) * (tdt - 2.0 * ttt) / s.omega(m);
      p.theta1 += (kappa * t * t * t * w / (8.0 * hbar)) * tdt;
      p.theta2 += (kappa * t * t * t * w / (6.0 * hbar)) * ttt;
    }
    out[static_cast<std::size_t>(b)] = p;
  }
  return out;
}

Vector field_vacuum(const TruncatedModeSystem& s) {
  Vector v = Vector::Zero(s.field_dim());
  v(0) = 1.0;
  return v;
}

RelativePhase extract_relative_phase(const Matrix& u, const Vector& field_state, const Vector& branch_a,
                                     const Vector& branch_b) {
  const Eigen::Index dp = branch_a.size();
  if (branch_b.size() != dp || dp * field_state.size() != u.rows())
    throw DomainError("extract_relative_phase: dimension mismatch");
  if (std::abs(branch_a.dot(branch_b)) > 1e-10 || std::abs(branch_a.norm() - 1.0) > 1e-10 ||
      std::abs(branch_b.norm() - 1.0) > 1e-10)
    throw DomainError("probe branches must be orthonormal");
  auto amplitude = [&](const Vector& br) {
    const Vector psi = Eigen::kroneckerProduct(br, field_state).eval();
    return psi.dot(u * psi);  // dot conjugates the left operand
  };
  const cd aa = amplitude(branch_a);
  const cd ab = amplitude(branch_b);
  if (std::abs(aa) < 1e-12 || std::abs(ab) < 1e-12) throw DomainError("branch suppressed");
  return {std::arg(ab / aa), std::log(std::abs(ab)) - std::log(std::abs(aa))};
}

PropagatorComparison compare_propagators(const TruncatedModeSystem& s, const ProbeStressTensor& tp,
                                         const std::vector<double>& hT_shift,
                                         const std::vector<double>& probe_energies, double t,
                                         std::size_t branch_a, std::size_t branch_b, int order) {
  const double hbar = s.constants().hbar;
  const Matrix hg = build_HG(s, tp.dim());
  const Matrix hi = build_HI(s, tp, hT_shift);
  const Matrix hf = build_Hfree(s, probe_energies);
  const Matrix exact = exact_propagator(hf + hg + hi, t, hbar);
  const Matrix zas = zassenhaus_product(hg, hi, hf, t, hbar, order);
  const Matrix v = branch_basis(tp);
  PropagatorComparison out;
  out.t = t;
  out.deviation = operator_norm(exact - zas);
  const Vector va = v.col(static_cast<Eigen::Index>(branch_a));
  const Vector vb = v.col(static_cast<Eigen::Index>(branch_b));
  out.exact = extract_relative_phase(exact, field_vacuum(s), va, vb);
  const auto pred = predict_theta(s, tp, hT_shift, t);
  auto free_energy = [&](const Vector& br) {
    double e = 0.0;
    for (std::size_t i = 0; i < probe_energies.size(); ++i) e += std::norm(br(static_cast<Eigen::Index>(i))) * probe_energies[i];
    return e;
  };
  const auto& pa = pred[branch_a];
  const auto& pb = pred[branch_b];
  out.predicted_phase = -(free_energy(vb) - free_energy(va)) * t / hbar + (pb.theta0_phase - pa.theta0_phase) +
                        (pb.theta1 - pa.theta1) + (pb.theta2 - pa.theta2);
  out.predicted_log_magnitude = -(pb.theta0_damping - pa.theta0_damping) / hbar;
  return out;
}

}  // namespace qgphase::opalg
