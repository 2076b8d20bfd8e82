#include "qgphase/phases.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "qgphase/parallel.hpp"

namespace qgphase::phases {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEigenSnap = 1e-12;

void check_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("evolution time must be finite and >= 0");
}

// Coulomb integrals between every branch density of a and of b.
struct CoulombTable {
  Eigen::MatrixXd value;
  Eigen::MatrixXd error;
};

CoulombTable coulomb_table(const QuantumSourceState& a, const QuantumSourceState& b,
                           const poisson::CoulombOptions& opt) {
  const auto na = static_cast<Eigen::Index>(a.size());
  const auto nb = static_cast<Eigen::Index>(b.size());
  CoulombTable t{Eigen::MatrixXd::Zero(na, nb), Eigen::MatrixXd::Zero(na, nb)};
  const std::size_t cells = a.size() * b.size();
  std::vector<poisson::CoulombResult> out(cells);
  parallel_for(cells, [&](std::size_t c) {
    poisson::CoulombOptions o = opt;
    o.seed = opt.seed + c;
    out[c] = poisson::mutual_coulomb(a.components()[c / b.size()].density,
                                     b.components()[c % b.size()].density, o);
  });
  for (std::size_t c = 0; c < cells; ++c) {
    const auto i = static_cast<Eigen::Index>(c / b.size());
    const auto j = static_cast<Eigen::Index>(c % b.size());
    t.value(i, j) = out[c].value;
    t.error(i, j) = out[c].std_error;
  }
  return t;
}

double max_relative_deviation(const Eigen::MatrixXd& ref, const Eigen::MatrixXd& other) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < ref.rows(); ++i)
    for (Eigen::Index j = 0; j < ref.cols(); ++j) {
      const double r = std::abs(ref(i, j));
      if (r == 0.0) continue;
      worst = std::max(worst, std::abs(ref(i, j) - other(i, j)) / r);
    }
  return worst;
}

// Points without an explicit width get the grid default so that
// self-interactions stay finite.
EnergyDensity regularised(const EnergyDensity& e, const poisson::CoulombOptions& opt,
                          const PhysicalConstants& k) {
  if (e.kind() != EnergyDensity::Kind::Point || e.sigma_reg() > 0.0) return e;
  const GridSpec grid{opt.n, opt.length};
  return EnergyDensity::point(e.rest_energy() / (k.c * k.c), e.center(), k, e.effective_sigma(grid));
}

}  // namespace

std::string to_string(Model m) {
  switch (m) {
    case Model::General: return "general";
    case Model::Newton: return "newton";
    case Model::Nonlocal: return "nonlocal";
    case Model::SchroedingerNewton: return "schroedinger-newton";
  }
  return "unknown";
}

PhaseValue theta_AB(const EnergyDensity& a, const EnergyDensity& b, double t, const PhysicalConstants& k,
                    const poisson::CoulombOptions& opt) {
  check_time(t);
  const auto c = poisson::mutual_coulomb(a, b, opt);
  const double pre = -k.kappa() * t / (4.0 * kPi * k.hbar);
  return {pre * c.value, std::abs(pre) * c.std_error};
}

EnergyValue self_energy(const EnergyDensity& e, const PhysicalConstants& k, const poisson::CoulombOptions& opt) {
  const auto c = poisson::mutual_coulomb(e, e, opt);
  const double pre = -k.kappa() / (8.0 * kPi);
  return {pre * c.value, std::abs(pre) * c.std_error};
}

double newton_prefactor_ratio(const PhysicalConstants& k) {
  return -k.kappa() * std::pow(k.c, 4) / (4.0 * kPi * k.G);
}

double nonlocal_prefactor_ratio(const PhysicalConstants& k) {
  return -4.0 * kPi * k.G / (k.kappa() * std::pow(k.c, 4));
}

PhaseMatrix newton_phase(const LocalizedSourceSpec& a, const LocalizedSourceSpec& b, double t,
                         const PhysicalConstants& k) {
  check_time(t);
  const auto na = static_cast<Eigen::Index>(a.branches().size());
  const auto nb = static_cast<Eigen::Index>(b.branches().size());
  PhaseMatrix m{Model::Newton, Eigen::MatrixXcd::Zero(na, nb), Eigen::MatrixXd::Zero(na, nb)};
  for (Eigen::Index i = 0; i < na; ++i)
    for (Eigen::Index j = 0; j < nb; ++j) {
      const double d = (a.branches()[i].center - b.branches()[j].center).norm();
      if (!(d > 0.0)) throw DomainError("newton_phase: coincident branch centres");
      m.theta(i, j) = cd(0.0, k.G * a.mass() * b.mass() * t / (k.hbar * d));
    }
  return m;
}

PhaseValue nonlocal_phase(const EnergyDensity& a, const EnergyDensity& b, double t, const PhysicalConstants& k,
                          const poisson::CoulombOptions& opt) {
  check_time(t);
  const auto c = poisson::mutual_coulomb(a, b, opt);
  const double pre = k.G * t / (std::pow(k.c, 4) * k.hbar);
  return {pre * c.value, pre * c.std_error};
}

PhaseMatrix sn_phase(const QuantumSourceState& a, const QuantumSourceState& b, double t,
                     const PhysicalConstants& k, const poisson::CoulombOptions& opt) {
  check_time(t);
  const CoulombTable c = coulomb_table(a, b, opt);
  const double pre = k.G * t / (k.hbar * std::pow(k.c, 4));
  const auto na = c.value.rows();
  const auto nb = c.value.cols();
  Eigen::VectorXd pa(na), pb(nb);
  for (Eigen::Index i = 0; i < na; ++i) pa(i) = std::norm(a.components()[i].amplitude);
  for (Eigen::Index j = 0; j < nb; ++j) pb(j) = std::norm(b.components()[j].amplitude);
  const Eigen::VectorXd u = pre * (c.value * pb);
  const Eigen::VectorXd v = pre * (c.value.transpose() * pa);
  const Eigen::VectorXd ue = pre * (c.error.array().square().matrix() * pb.array().square().matrix()).cwiseSqrt();
  const Eigen::VectorXd ve =
      pre * (c.error.transpose().array().square().matrix() * pa.array().square().matrix()).cwiseSqrt();
  PhaseMatrix m{Model::SchroedingerNewton, Eigen::MatrixXcd::Zero(na, nb), Eigen::MatrixXd::Zero(na, nb)};
  for (Eigen::Index i = 0; i < na; ++i)
    for (Eigen::Index j = 0; j < nb; ++j) {
      m.theta(i, j) = cd(0.0, u(i) + v(j));
      m.std_error(i, j) = std::hypot(ue(i), ve(j));
    }
  return m;
}

PhaseMatrix phase_matrix_general(const QuantumSourceState& a, const QuantumSourceState& b, double t,
                                 const PhysicalConstants& k, const poisson::CoulombOptions& opt) {
  check_time(t);
  const CoulombTable c = coulomb_table(a, b, opt);
  const double pre = -k.kappa() * t / (4.0 * kPi * k.hbar);
  PhaseMatrix m{Model::General, Eigen::MatrixXcd::Zero(c.value.rows(), c.value.cols()),
                std::abs(pre) * c.error};
  m.theta.imag() = pre * c.value;
  return m;
}

double negativity(const std::vector<cd>& ca, const std::vector<cd>& cb, const Eigen::MatrixXcd& theta) {
  const auto na = static_cast<Eigen::Index>(ca.size());
  const auto nb = static_cast<Eigen::Index>(cb.size());
  if (theta.rows() != na || theta.cols() != nb) throw DomainError("negativity: shape mismatch");
  Eigen::MatrixXcd psi(na, nb);
  for (Eigen::Index i = 0; i < na; ++i)
    for (Eigen::Index j = 0; j < nb; ++j) psi(i, j) = ca[i] * cb[j] * std::exp(theta(i, j));
  const double norm = psi.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw DomainError("negativity: state is not normalisable");
  psi /= norm;
  const Eigen::Index dim = na * nb;
  Eigen::MatrixXcd pt(dim, dim);
  for (Eigen::Index i = 0; i < na; ++i)
    for (Eigen::Index j = 0; j < nb; ++j)
      for (Eigen::Index kk = 0; kk < na; ++kk)
        for (Eigen::Index l = 0; l < nb; ++l)
          pt(i * nb + j, kk * nb + l) = psi(i, l) * std::conj(psi(kk, j));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(pt, Eigen::EigenvaluesOnly);
  double neg = 0.0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double lam = es.eigenvalues()(i);
    if (lam < -kEigenSnap) neg -= lam;
  }
  return neg;
}

const ModelRow& PhaseReport::row(Model m) const {
  for (const auto& r : models)
    if (r.model == m) return r;
  throw DomainError("model row missing from report");
}

std::pair<std::size_t, std::size_t> nearest_pair(const LocalizedSourceSpec& a, const LocalizedSourceSpec& b) {
  std::pair<std::size_t, std::size_t> best{0, 0};
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < a.branches().size(); ++i)
    for (std::size_t j = 0; j < b.branches().size(); ++j) {
      const double d = (a.branches()[i].center - b.branches()[j].center).norm();
      if (d < dmin) {
        dmin = d;
        best = {i, j};
      }
    }
  return best;
}

LocalizedSourceSpec with_width(const LocalizedSourceSpec& s, double sigma) {
  auto branches = s.branches();
  for (auto& b : branches) b.sigma = sigma;
  return {s.mass(), std::move(branches)};
}

PhaseReport compare_models(const PhaseRequest& req) {
  const PhysicalConstants& k = req.constants;
  const QuantumSourceState sa = req.source_a.to_state(k, 0);
  const QuantumSourceState sb = req.source_b.to_state(k, req.source_a.branches().size());
  const auto ca = sa.amplitudes();
  const auto cb = sb.amplitudes();

  PhaseReport rep;
  rep.newton_ratio = newton_prefactor_ratio(k);
  rep.nonlocal_ratio = nonlocal_prefactor_ratio(k);
  rep.vacuum_note =
      "E_vac (field vacuum energy) is divergent and cancels in every phase; kept symbolic, not evaluated";
  rep.classical_quantum_note =
      "classical-quantum hybrid: decoherence-dominated stochastic open-system dynamics, no entanglement";

  ModelRow general{Model::General, phase_matrix_general(sa, sb, req.t, k, req.coulomb), 0.0, {}};
  general.negativity = negativity(ca, cb, general.matrix->theta);
  const Eigen::MatrixXd gphase = general.matrix->phases();

  ModelRow newton{Model::Newton, std::nullopt, 0.0, {}};
  try {
    newton.matrix = newton_phase(req.source_a, req.source_b, req.t, k);
    newton.negativity = negativity(ca, cb, newton.matrix->theta);
    rep.general_vs_newton = max_relative_deviation(gphase, rep.newton_ratio * newton.matrix->phases());
  } catch (const DomainError& e) {
    newton.skip_reason = e.what();
  }

  // The nonlocal kernel is the general one up to a constant factor.
  ModelRow nonlocal{Model::Nonlocal, *general.matrix, 0.0, {}};
  nonlocal.matrix->model = Model::Nonlocal;
  nonlocal.matrix->theta *= rep.nonlocal_ratio;
  nonlocal.matrix->std_error *= std::abs(rep.nonlocal_ratio);
  nonlocal.negativity = negativity(ca, cb, nonlocal.matrix->theta);
  rep.general_vs_nonlocal = max_relative_deviation(gphase, nonlocal.matrix->phases() / rep.nonlocal_ratio);

  ModelRow sn{Model::SchroedingerNewton, sn_phase(sa, sb, req.t, k, req.coulomb), 0.0, {}};
  sn.negativity = negativity(ca, cb, sn.matrix->theta);
  rep.general_vs_sn = max_relative_deviation(gphase, sn.matrix->phases());

  rep.models = {std::move(general), std::move(newton), std::move(nonlocal), std::move(sn)};

  for (const auto& c : sa.components()) rep.self_energy_a.push_back(self_energy(regularised(c.density, req.coulomb, k), k, req.coulomb));
  for (const auto& c : sb.components()) rep.self_energy_b.push_back(self_energy(regularised(c.density, req.coulomb, k), k, req.coulomb));

  if (!req.convergence_fractions.empty()) {
    const auto [i, j] = nearest_pair(req.source_a, req.source_b);
    const double d = (req.source_a.branches()[i].center - req.source_b.branches()[j].center).norm();
    const double newton_scaled = rep.newton_ratio * k.G * req.source_a.mass() * req.source_b.mass() * req.t / (k.hbar * d);
    for (double f : req.convergence_fractions) {
      const double sigma = f * d;
      const auto a = with_width(req.source_a, sigma);
      const auto b = with_width(req.source_b, sigma);
      const PhaseValue th = theta_AB(a.branch_density(i, k), b.branch_density(j, k), req.t, k, req.coulomb);
      rep.convergence.push_back(
          {sigma, th.phase, newton_scaled, std::abs(th.phase - newton_scaled) / std::abs(newton_scaled), th.std_error});
    }
  }
  return rep;
}

}  // namespace qgphase::phases
