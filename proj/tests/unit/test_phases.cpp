#include <random>

#include <gtest/gtest.h>

#include "../support/oracles.hpp"
#include "qgphase/phases.hpp"

using namespace qgphase;
using namespace qgphase::phases;
using poisson::Backend;
using poisson::CoulombOptions;

namespace {

const PhysicalConstants kUnit{1.0, 1.0, 1.0};
constexpr double kPi = std::numbers::pi;

CoulombOptions analytic() { return {Backend::Analytic, 32, 1.0, 0, 1}; }
CoulombOptions spectral(int n = 32, double length = 1.0) { return {Backend::Spectral, n, length, 0, 1}; }

std::array<std::array<cd, 2>, 2> state_2x2(const std::vector<cd>& a, const std::vector<cd>& b,
                                           const Eigen::MatrixXcd& theta) {
  std::array<std::array<cd, 2>, 2> psi{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) psi[i][j] = a[i] * b[j] * std::exp(theta(i, j));
  return psi;
}

// Two-branch sources along x: A at {-0.25, -0.05}, B at {0.05, 0.25}.
LocalizedSourceSpec gie_a(double sigma, double mass = 1.0) {
  return {mass, {{cd(M_SQRT1_2), Vec3(-0.25, 0, 0), sigma}, {cd(M_SQRT1_2), Vec3(-0.05, 0, 0), sigma}}};
}
LocalizedSourceSpec gie_b(double sigma, double mass = 1.0) {
  return {mass, {{cd(M_SQRT1_2), Vec3(0.05, 0, 0), sigma}, {cd(M_SQRT1_2), Vec3(0.25, 0, 0), sigma}}};
}

}  // namespace

TEST(ThetaAB, TrivialZeros) {
  const auto a = EnergyDensity::gaussian(1.0, Vec3(-0.1, 0, 0), 0.05, kUnit);
  const auto b = EnergyDensity::gaussian(1.0, Vec3(0.1, 0, 0), 0.05, kUnit);
  EXPECT_EQ(theta_AB(a, EnergyDensity::zero({32, 1.0}), 1.0, kUnit, spectral()).phase, 0.0);
  EXPECT_EQ(theta_AB(a, b, 0.0, kUnit, spectral()).phase, 0.0);
  EXPECT_THROW(theta_AB(a, b, -1.0, kUnit, spectral()), DomainError);
}

TEST(ThetaAB, ExactPointPairValue) {
  const PhysicalConstants k{0.7, 1.3, 0.4};
  const double ma = 2.0, mb = 0.5, d = 0.3, t = 1.7;
  const auto a = EnergyDensity::point(ma, Vec3(-d / 2, 0, 0), k);
  const auto b = EnergyDensity::point(mb, Vec3(d / 2, 0, 0), k);
  const double expected = -k.kappa() * t * ma * mb * std::pow(k.c, 4) / (4.0 * kPi * k.hbar * d);
  EXPECT_NEAR(theta_AB(a, b, t, k, analytic()).phase / expected, 1.0, 1e-14);
}

TEST(ThetaAB, RegularisedPointsOnGridWithinTwoPercent) {
  const double d = 0.3, t = 1.0;
  const auto a = EnergyDensity::point(1.0, Vec3(-d / 2, 0, 0), kUnit);
  const auto b = EnergyDensity::point(1.0, Vec3(d / 2, 0, 0), kUnit);
  const double expected = -kUnit.kappa() * t / (4.0 * kPi * d);
  EXPECT_LT(std::abs(theta_AB(a, b, t, kUnit, spectral()).phase / expected - 1.0), 0.02);
}

TEST(ThetaAB, BilinearAndLinearInTime) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> s(0.2, 5.0);
  const auto a = sample_on_grid(EnergyDensity::gaussian(1.0, Vec3(-0.1, 0.02, 0), 0.06, kUnit), 32, 1.0);
  const auto b = sample_on_grid(EnergyDensity::gaussian(0.7, Vec3(0.12, -0.03, 0.05), 0.08, kUnit), 32, 1.0);
  const double base = theta_AB(a, b, 1.0, kUnit, spectral()).phase;
  for (int trial = 0; trial < 5; ++trial) {
    const double x = s(rng), y = s(rng), t = s(rng);
    const double v = theta_AB(a.scaled(x), b.scaled(y), t, kUnit, spectral()).phase;
    EXPECT_NEAR(v / (x * y * t * base), 1.0, 1e-10);
  }
}

TEST(ThetaAB, SymmetricInSources) {
  const auto a = EnergyDensity::gaussian(1.0, Vec3(-0.1, 0.02, 0), 0.06, kUnit);
  const auto b = EnergyDensity::gaussian(0.7, Vec3(0.12, -0.03, 0.05), 0.08, kUnit);
  const double ab = theta_AB(a, b, 1.0, kUnit, spectral()).phase;
  const double ba = theta_AB(b, a, 1.0, kUnit, spectral()).phase;
  EXPECT_NEAR(ab / ba, 1.0, 1e-10);
}

TEST(ThetaAB, ScreeningShrinksMagnitudeAsWidthGrows) {
  const double d = 0.2;
  double previous = std::numeric_limits<double>::infinity();
  for (double sigma : {0.02, 0.03, 0.045, 0.06, 0.08}) {
    const auto a = EnergyDensity::gaussian(1.0, Vec3(-d / 2, 0, 0), sigma, kUnit);
    const auto b = EnergyDensity::gaussian(1.0, Vec3(d / 2, 0, 0), sigma, kUnit);
    const double v = std::abs(theta_AB(a, b, 1.0, kUnit, spectral()).phase);
    EXPECT_LT(v, previous) << "sigma " << sigma;
    previous = v;
  }
}

TEST(ThetaAB, GaussianPairFollowsShellTheoremOracle) {
  const double d = 0.2;
  for (double frac : {0.2, 0.1, 0.05}) {
    const double sigma = frac * d;
    const auto a = EnergyDensity::gaussian(1.0, Vec3(-d / 2, 0, 0), sigma, kUnit);
    const auto b = EnergyDensity::gaussian(1.0, Vec3(d / 2, 0, 0), sigma, kUnit);
    const double expected = -kUnit.kappa() / (4.0 * kPi) * oracle::gaussian_pair(1.0, 1.0, d, sigma, sigma);
    EXPECT_NEAR(theta_AB(a, b, 1.0, kUnit, analytic()).phase / expected, 1.0, 1e-13);
  }
}

TEST(Prefactors, RatiosAreMinusFourAndMinusQuarter) {
  for (const auto& k : {kUnit, PhysicalConstants::si(), PhysicalConstants{3.0, 0.5, 2.0}}) {
    EXPECT_NEAR(newton_prefactor_ratio(k), -4.0, 1e-13);
    EXPECT_NEAR(nonlocal_prefactor_ratio(k), -0.25, 1e-13);
  }
}

TEST(SelfEnergy, ZeroAndQuadraticScaling) {
  EXPECT_EQ(self_energy(EnergyDensity::zero({32, 1.0}), kUnit, spectral()).value, 0.0);
  const auto e = sample_on_grid(EnergyDensity::gaussian(1.0, Vec3::Zero(), 0.08, kUnit), 32, 1.0);
  const double one = self_energy(e, kUnit, spectral()).value;
  EXPECT_LT(one, 0.0);
  EXPECT_NEAR(self_energy(e.scaled(2.0), kUnit, spectral()).value / one, 4.0, 1e-12);
}

TEST(SelfEnergy, GaussianMatchesMonteCarloOracle) {
  const double sigma = 0.08, m = 1.5;
  const auto e = EnergyDensity::gaussian(m, Vec3::Zero(), sigma, kUnit);
  const auto mc = oracle::mc_inverse_distance({0, 0, 0}, sigma, {0, 0, 0}, sigma, 400000, 99);
  const double expected = -kUnit.kappa() / (8.0 * kPi) * m * m * mc.mean;
  EXPECT_LT(std::abs(self_energy(e, kUnit, spectral()).value / expected - 1.0), 0.02);
  const double closed = -kUnit.kappa() / (8.0 * kPi) * m * m / (sigma * std::sqrt(kPi));
  EXPECT_NEAR(self_energy(e, kUnit, analytic()).value / closed, 1.0, 1e-14);
}

TEST(NewtonPhase, SingleBranchAndFarLimit) {
  const PhysicalConstants k{0.7, 1.3, 0.4};
  const LocalizedSourceSpec a(2.0, {{cd(1.0), Vec3::Zero(), 0.0}});
  const LocalizedSourceSpec b(0.5, {{cd(1.0), Vec3(0, 0.4, 0), 0.0}});
  const auto m = newton_phase(a, b, 3.0, k);
  ASSERT_EQ(m.theta.rows(), 1);
  EXPECT_DOUBLE_EQ(m.theta(0, 0).imag(), k.G * 2.0 * 0.5 * 3.0 / (k.hbar * 0.4));
  EXPECT_EQ(m.theta(0, 0).real(), 0.0);
  const LocalizedSourceSpec far(0.5, {{cd(1.0), Vec3(1e300, 0, 0), 0.0}});
  EXPECT_LT(std::abs(newton_phase(a, far, 3.0, k).theta(0, 0)), 1e-299);
}

TEST(NewtonPhase, RelativePhaseMatchesScalarArithmetic) {
  const double m = 1e-14, t = 2.5;
  const PhysicalConstants si = PhysicalConstants::si();
  const double dx = 250e-6, sep = 450e-6;
  const LocalizedSourceSpec a(m, {{cd(M_SQRT1_2), Vec3(0, -dx / 2, 0), 0.0}, {cd(M_SQRT1_2), Vec3(0, dx / 2, 0), 0.0}});
  const LocalizedSourceSpec b(m, {{cd(M_SQRT1_2), Vec3(sep, -dx / 2, 0), 0.0}, {cd(M_SQRT1_2), Vec3(sep, dx / 2, 0), 0.0}});
  const auto th = newton_phase(a, b, t, si).theta;
  const double g = si.G * m * m * t / si.hbar;
  const double diag = sep, cross = std::sqrt(sep * sep + dx * dx);
  const double expected = 2.0 * g / diag - 2.0 * g / cross;
  const double got = (th(0, 0) + th(1, 1) - th(0, 1) - th(1, 0)).imag();
  EXPECT_NEAR(got / expected, 1.0, 1e-12);
}

TEST(NewtonPhase, CoincidentCentresRejected) {
  const LocalizedSourceSpec a(1.0, {{cd(1.0), Vec3::Zero(), 0.0}});
  EXPECT_THROW(newton_phase(a, a, 1.0, kUnit), DomainError);
}

TEST(NonlocalPhase, PointPairAndZero) {
  const double d = 0.25, t = 2.0;
  const auto a = EnergyDensity::point(1.5, Vec3(-d / 2, 0, 0), kUnit);
  const auto b = EnergyDensity::point(0.8, Vec3(d / 2, 0, 0), kUnit);
  EXPECT_NEAR(nonlocal_phase(a, b, t, kUnit, analytic()).phase / (1.5 * 0.8 * t / d), 1.0, 1e-14);
  EXPECT_EQ(nonlocal_phase(a, EnergyDensity::zero({32, 1.0}), t, kUnit, spectral()).phase, 0.0);
}

TEST(NonlocalPhase, RatioToThetaConstantAcrossGeometries) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> pos(-0.15, 0.15), wid(0.04, 0.08);
  for (int trial = 0; trial < 4; ++trial) {
    const auto a = EnergyDensity::gaussian(1.0, Vec3(pos(rng), pos(rng), pos(rng)), wid(rng), kUnit);
    const auto b = EnergyDensity::gaussian(2.0, Vec3(pos(rng), pos(rng), pos(rng)), wid(rng), kUnit);
    const double r = nonlocal_phase(a, b, 1.0, kUnit, spectral()).phase / theta_AB(a, b, 1.0, kUnit, spectral()).phase;
    EXPECT_NEAR(r, nonlocal_prefactor_ratio(kUnit), 1e-6);
  }
}

TEST(SnPhase, IdenticalPointBranchesGiveBothCrossTerms) {
  const double d = 0.3, t = 1.2;
  const QuantumSourceState a({{cd(1.0), 0, EnergyDensity::point(1.0, Vec3(-d / 2, 0, 0), kUnit)}});
  const QuantumSourceState b({{cd(1.0), 1, EnergyDensity::point(2.0, Vec3(d / 2, 0, 0), kUnit)}});
  const double expected = 2.0 * 1.0 * 2.0 * t / d;
  EXPECT_NEAR(sn_phase(a, b, t, kUnit, analytic()).theta(0, 0).imag() / expected, 1.0, 1e-14);
  EXPECT_LT(std::abs(sn_phase(a, b, t, kUnit, spectral()).theta(0, 0).imag() / expected - 1.0), 0.02);
}

TEST(SnPhase, SeparableHenceNotEntangling) {
  const auto sa = gie_a(0.02).to_state(kUnit, 0);
  const auto sb = gie_b(0.02).to_state(kUnit, 2);
  const auto m = sn_phase(sa, sb, 50.0, kUnit, analytic());
  const auto th = m.phases();
  EXPECT_NEAR(th(0, 0) + th(1, 1) - th(0, 1) - th(1, 0), 0.0, 1e-12 * th.cwiseAbs().maxCoeff());
  EXPECT_EQ(negativity(sa.amplitudes(), sb.amplitudes(), m.theta), 0.0);
}

TEST(SnPhase, DiffersFromGeneralBeyondMonteCarloError) {
  const double d = 0.2, sigma = 0.1;
  const LocalizedSourceSpec a(1.0, {{cd(1.0), Vec3(-d / 2, 0, 0), sigma}});
  const LocalizedSourceSpec b(1.0, {{cd(1.0), Vec3(d / 2, 0, 0), sigma}});
  const CoulombOptions mc{Backend::MonteCarlo, 32, 1.0, 200000, 5};
  const auto sa = a.to_state(kUnit, 0), sb = b.to_state(kUnit, 1);
  const auto g = phase_matrix_general(sa, sb, 1.0, kUnit, mc);
  const auto s = sn_phase(sa, sb, 1.0, kUnit, mc);
  const double diff = std::abs(g.theta(0, 0).imag() - s.theta(0, 0).imag());
  EXPECT_GT(diff, 5.0 * std::hypot(g.std_error(0, 0), s.std_error(0, 0)));
}

TEST(GeneralMatrix, SingleComponentEqualsThetaAndSwapTransposes) {
  const auto ea = EnergyDensity::gaussian(1.0, Vec3(-0.1, 0, 0), 0.05, kUnit);
  const auto eb = EnergyDensity::gaussian(0.6, Vec3(0.1, 0, 0), 0.04, kUnit);
  const QuantumSourceState a({{cd(1.0), 0, ea}}), b({{cd(1.0), 1, eb}});
  const auto m = phase_matrix_general(a, b, 2.0, kUnit, spectral());
  ASSERT_EQ(m.theta.size(), 1);
  EXPECT_DOUBLE_EQ(m.theta(0, 0).imag(), theta_AB(ea, eb, 2.0, kUnit, spectral()).phase);
  EXPECT_EQ(m.theta(0, 0).real(), 0.0);

  const auto sa = gie_a(0.03).to_state(kUnit, 0);
  const auto sb = gie_b(0.05).to_state(kUnit, 2);
  const auto ab = phase_matrix_general(sa, sb, 1.0, kUnit, spectral()).phases();
  const auto ba = phase_matrix_general(sb, sa, 1.0, kUnit, spectral()).phases();
  EXPECT_LT((ab - ba.transpose()).cwiseAbs().maxCoeff(), 1e-10 * ab.cwiseAbs().maxCoeff());
}

TEST(Negativity, MaximalPhaseGivesOneHalf) {
  const std::vector<cd> c{cd(M_SQRT1_2), cd(M_SQRT1_2)};
  Eigen::MatrixXcd theta = Eigen::MatrixXcd::Zero(2, 2);
  theta(1, 1) = cd(0.0, kPi);
  EXPECT_NEAR(negativity(c, c, theta), 0.5, 1e-12);
  EXPECT_NEAR(oracle::negativity_2x2_bruteforce(state_2x2(c, c, theta)), 0.5, 1e-12);
}

TEST(Negativity, SeparablePhaseGivesZero) {
  const std::vector<cd> c{cd(0.6), cd(0, 0.8)};
  Eigen::MatrixXcd theta(2, 2);
  const double u[2] = {0.3, -1.7}, v[2] = {2.2, 0.4};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) theta(i, j) = cd(0.0, u[i] + v[j]);
  EXPECT_EQ(negativity(c, c, theta), 0.0);
}

TEST(Negativity, RandomStatesBoundedAndMatchOracles) {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0), ph(-10.0, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::vector<cd> a{cd(u(rng), u(rng)), cd(u(rng), u(rng))};
    const std::vector<cd> b{cd(u(rng), u(rng)), cd(u(rng), u(rng))};
    Eigen::MatrixXcd theta(2, 2);
    for (int i = 0; i < 4; ++i) theta(i / 2, i % 2) = cd(0.0, ph(rng));
    const double n = negativity(a, b, theta);
    EXPECT_GE(n, 0.0);
    EXPECT_LE(n, 0.5 + 1e-12);
    const auto psi = state_2x2(a, b, theta);
    EXPECT_NEAR(n, oracle::negativity_2x2(psi), 1e-10);
    EXPECT_NEAR(n, oracle::negativity_2x2_bruteforce(psi), 1e-10);
  }
}

TEST(Negativity, DampingEntersAsMagnitude) {
  const std::vector<cd> c{cd(M_SQRT1_2), cd(M_SQRT1_2)};
  Eigen::MatrixXcd theta = Eigen::MatrixXcd::Zero(2, 2);
  theta(1, 1) = cd(-0.5, kPi);
  EXPECT_NEAR(negativity(c, c, theta), oracle::negativity_2x2(state_2x2(c, c, theta)), 1e-12);
  EXPECT_LT(negativity(c, c, theta), 0.5);
}

TEST(Negativity, Errors) {
  const std::vector<cd> c{cd(1.0), cd(0.0)};
  EXPECT_THROW(negativity(c, c, Eigen::MatrixXcd::Zero(3, 2)), DomainError);
  EXPECT_THROW(negativity({cd(0.0), cd(0.0)}, c, Eigen::MatrixXcd::Zero(2, 2)), DomainError);
}

TEST(CompareModels, NarrowLimitAgreesWithNewtonShape) {
  PhaseRequest req{gie_a(0.01), gie_b(0.01), 0.1, kUnit, analytic(), {0.2, 0.1}};
  const auto rep = compare_models(req);
  ASSERT_EQ(rep.models.size(), 4u);
  EXPECT_EQ(rep.models[0].model, Model::General);
  EXPECT_EQ(rep.models[3].model, Model::SchroedingerNewton);
  for (const auto& r : rep.models) EXPECT_TRUE(r.matrix.has_value()) << to_string(r.model);
  EXPECT_LT(rep.general_vs_newton, 0.02);
  EXPECT_LT(rep.general_vs_nonlocal, 1e-12);
  EXPECT_EQ(rep.row(Model::SchroedingerNewton).negativity, 0.0);
  EXPECT_GT(rep.row(Model::General).negativity, 0.0);
  EXPECT_DOUBLE_EQ(rep.newton_ratio, -4.0);
  ASSERT_EQ(rep.self_energy_a.size(), 2u);
  EXPECT_LT(rep.self_energy_a[0].value, 0.0);
  ASSERT_EQ(rep.convergence.size(), 2u);
  EXPECT_GT(rep.convergence[0].relative_deviation, rep.convergence[1].relative_deviation);
  EXPECT_FALSE(rep.vacuum_note.empty());
}

TEST(CompareModels, WideGaussiansDeviateFromNewton) {
  // sigma = d/2 for the nearest pair.
  PhaseRequest req{gie_a(0.05), gie_b(0.05), 0.1, kUnit, analytic(), {}};
  const auto rep = compare_models(req);
  EXPECT_GT(rep.general_vs_newton, 0.10);
  EXPECT_NEAR(rep.general_vs_newton, (1.0 - std::erf(1.0)) / std::erf(1.0), 1e-12);
}

TEST(CompareModels, CoincidentCentresSkipNewtonOnly) {
  const LocalizedSourceSpec a(1.0, {{cd(1.0), Vec3::Zero(), 0.05}});
  PhaseRequest req{a, a, 1.0, kUnit, analytic(), {}};
  const auto rep = compare_models(req);
  EXPECT_FALSE(rep.row(Model::Newton).matrix.has_value());
  EXPECT_FALSE(rep.row(Model::Newton).skip_reason.empty());
  EXPECT_TRUE(rep.row(Model::General).matrix.has_value());
}

TEST(FunctionalForm, WidthChangesThetaButNotNewton) {
  const auto narrow_a = gie_a(0.01), narrow_b = gie_b(0.01);
  const auto wide_a = with_width(narrow_a, 0.05), wide_b = with_width(narrow_b, 0.05);
  const auto n1 = newton_phase(narrow_a, narrow_b, 1.0, kUnit).theta;
  const auto n2 = newton_phase(wide_a, wide_b, 1.0, kUnit).theta;
  EXPECT_EQ(n1, n2);
  const auto [i, j] = nearest_pair(narrow_a, narrow_b);
  EXPECT_EQ(i, 1u);
  EXPECT_EQ(j, 0u);
  const double t1 = theta_AB(narrow_a.branch_density(i, kUnit), narrow_b.branch_density(j, kUnit), 1.0, kUnit, analytic()).phase;
  const double t2 = theta_AB(wide_a.branch_density(i, kUnit), wide_b.branch_density(j, kUnit), 1.0, kUnit, analytic()).phase;
  EXPECT_GT(std::abs(t1 - t2) / std::abs(t1), 0.05);
}
