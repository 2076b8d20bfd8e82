#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "qgphase/sources.hpp"

using namespace qgphase;

namespace {

const PhysicalConstants kUnit{1.0, 1.0, 1.0};

std::vector<SourceComponent> random_components(std::mt19937_64& rng, std::size_t count, std::size_t index_pool) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::size_t> idx(index_pool);
  for (std::size_t i = 0; i < index_pool; ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<SourceComponent> c;
  const GridSpec g{4, 1.0};
  for (std::size_t i = 0; i < count; ++i) c.push_back({cd(u(rng), u(rng)), idx[i], EnergyDensity::zero(g)});
  return c;
}

}  // namespace

TEST(Constants, KappaFromG) {
  const PhysicalConstants si = PhysicalConstants::si();
  const double expected = 16.0 * std::numbers::pi * si.G / std::pow(si.c, 4);
  EXPECT_NEAR(si.kappa() / expected, 1.0, 1e-15);
  EXPECT_THROW(PhysicalConstants(0.0, 1.0, 1.0), DomainError);
  EXPECT_THROW(PhysicalConstants(1.0, -1.0, 1.0), DomainError);
}

TEST(Constants, NaturalUnitsPreserveDimensionlessPhase) {
  // G m^2 t / (hbar d) must not depend on the unit system.
  const PhysicalConstants si = PhysicalConstants::si();
  const double m = 1e-14, d = 250e-6, t = 2.5;
  const double phase_si = si.G * m * m * t / (si.hbar * d);
  const UnitSystem u{1e-14, 1e-4};
  const PhysicalConstants nat = u.natural_constants(si);
  EXPECT_DOUBLE_EQ(nat.c, 1.0);
  const double phase_nat = nat.G * std::pow(u.mass_to_natural(m), 2) * u.time_to_natural(t, si) /
                           (nat.hbar * u.length_to_natural(d));
  EXPECT_NEAR(phase_nat / phase_si, 1.0, 1e-12);
}

TEST(SampleOnGrid, GaussianMassRenormalised) {
  const double L = 1.0;
  const auto e = EnergyDensity::gaussian(1.0, Vec3::Zero(), L / 16, kUnit);
  const auto g = sample_on_grid(e, 32, L);
  double s = 0.0;
  for (double v : g.values()) s += v;
  EXPECT_NEAR(s * g.grid().cell_volume(), 1.0, 1e-9);
  const PhysicalConstants c2{1.0, 3.0, 1.0};
  const auto g2 = sample_on_grid(EnergyDensity::gaussian(1.0, Vec3::Zero(), L / 16, c2), 32, L);
  EXPECT_NEAR(total_mass(g2, c2), 1.0, 1e-9);
  EXPECT_NEAR(g2.rest_energy(), 9.0, 1e-8);
}

TEST(SampleOnGrid, PointPeaksAtCentreCellWithExactMass) {
  const GridSpec grid{16, 1.0};
  const auto e = EnergyDensity::point(2.0, Vec3::Zero(), kUnit);
  const auto g = sample_on_grid(e, grid.n, grid.length);
  const auto it = std::max_element(g.values().begin(), g.values().end());
  EXPECT_EQ(static_cast<std::size_t>(it - g.values().begin()), grid.index(8, 8, 8));
  EXPECT_NEAR(total_mass(g, kUnit), 2.0, 1e-12);
  EXPECT_DOUBLE_EQ(e.effective_sigma(grid), 2.0 * grid.spacing());
}

TEST(SampleOnGrid, RefinementChangesValuesByLessThanOnePercent) {
  const double L = 2.0;
  const auto e = EnergyDensity::gaussian(1.0, Vec3(0.1, -0.05, 0.0), 0.2, kUnit);
  const auto a = sample_on_grid(e, 16, L);
  const auto b = sample_on_grid(e, 32, L);
  // Grid points of the coarse grid coincide with every other fine point.
  double worst = 0.0, peak = 0.0;
  for (int iz = 0; iz < 16; ++iz)
    for (int iy = 0; iy < 16; ++iy)
      for (int ix = 0; ix < 16; ++ix) {
        const double va = a.values()[a.grid().index(ix, iy, iz)];
        const double vb = b.values()[b.grid().index(2 * ix, 2 * iy, 2 * iz)];
        worst = std::max(worst, std::abs(va - vb));
        peak = std::max(peak, vb);
      }
  EXPECT_LT(worst / peak, 0.01);
}

TEST(SampleOnGrid, Errors) {
  const auto e = EnergyDensity::gaussian(1.0, Vec3::Zero(), 0.2, kUnit);
  EXPECT_THROW(sample_on_grid(e, 12, 2.0), DomainError);
  EXPECT_THROW(sample_on_grid(e, 16, 1.0), DomainError);  // 6 sigma = 1.2 > L
  const auto far = EnergyDensity::gaussian(1.0, Vec3(5, 0, 0), 0.1, kUnit);
  EXPECT_THROW(sample_on_grid(far, 16, 2.0), DomainError);
  EXPECT_THROW(EnergyDensity::gaussian(1.0, Vec3::Zero(), 0.0, kUnit), DomainError);
  EXPECT_THROW(EnergyDensity::on_grid({2, 1.0}, std::vector<double>(8, -1.0)), DomainError);
}

TEST(TotalMass, Examples) {
  EXPECT_DOUBLE_EQ(total_mass(EnergyDensity::gaussian(2.0, Vec3::Zero(), 0.1, kUnit), kUnit), 2.0);
  EXPECT_DOUBLE_EQ(total_mass(EnergyDensity::zero({8, 1.0}), kUnit), 0.0);
  const auto a = sample_on_grid(EnergyDensity::gaussian(2.0, Vec3(0.1, 0, 0), 0.1, kUnit), 16, 1.0);
  const auto b = sample_on_grid(EnergyDensity::gaussian(0.5, Vec3(-0.1, 0, 0), 0.08, kUnit), 16, 1.0);
  EXPECT_NEAR(total_mass(a + b, kUnit), 2.5, 1e-12);
  EXPECT_NEAR(total_mass(a.scaled(3.0), kUnit), 6.0, 1e-12);
}

TEST(TotalMass, RefinementInvariant) {
  const auto e = EnergyDensity::gaussian(1.0, Vec3::Zero(), 0.15, kUnit);
  const double m8 = total_mass(sample_on_grid(e, 8, 1.0), kUnit);
  const double m32 = total_mass(sample_on_grid(e, 32, 1.0), kUnit);
  EXPECT_LT(std::abs(m8 - m32) / m32, 1e-3);
}

TEST(SourceState, NormalisationEnforced) {
  const GridSpec g{4, 1.0};
  EXPECT_THROW(QuantumSourceState({}), DomainError);
  EXPECT_THROW(QuantumSourceState({{cd(0.5), 0, EnergyDensity::zero(g)}}), DomainError);
  EXPECT_THROW(QuantumSourceState({{cd(M_SQRT1_2), 0, EnergyDensity::zero(g)}, {cd(M_SQRT1_2), 0, EnergyDensity::zero(g)}}),
               DomainError);
  const auto s = QuantumSourceState::normalised({{cd(3.0), 0, EnergyDensity::zero(g)}, {cd(0, 4.0), 1, EnergyDensity::zero(g)}});
  EXPECT_NEAR(std::abs(s.components()[0].amplitude), 0.6, 1e-15);
}

TEST(SourceOverlap, Examples) {
  const GridSpec g{4, 1.0};
  const auto z = EnergyDensity::zero(g);
  const QuantumSourceState e1({{cd(1.0), 1, z}});
  const QuantumSourceState e2({{cd(1.0), 2, z}});
  const QuantumSourceState plus({{cd(M_SQRT1_2), 1, z}, {cd(M_SQRT1_2), 2, z}});
  EXPECT_NEAR(std::abs(source_overlap(plus, plus) - 1.0), 0.0, 1e-15);
  EXPECT_EQ(source_overlap(e1, e2), cd(0.0));
  EXPECT_NEAR(std::abs(source_overlap(plus, e1) - M_SQRT1_2), 0.0, 1e-15);
}

TEST(SourceOverlap, ConjugateSymmetricAndBounded) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = QuantumSourceState::normalised(random_components(rng, 1 + trial % 4, 6));
    const auto b = QuantumSourceState::normalised(random_components(rng, 1 + (trial / 3) % 5, 6));
    const cd ab = source_overlap(a, b);
    EXPECT_LT(std::abs(ab - std::conj(source_overlap(b, a))), 1e-15);
    EXPECT_LE(std::abs(ab), 1.0 + 1e-12);
  }
}

TEST(LocalizedSpec, BranchesBecomeIndexedDensities) {
  const LocalizedSourceSpec s(2.0, {{cd(M_SQRT1_2), Vec3(0.1, 0, 0), 0.0}, {cd(M_SQRT1_2), Vec3(-0.1, 0, 0), 0.05}});
  const auto st = s.to_state(kUnit, 10);
  ASSERT_EQ(st.size(), 2u);
  EXPECT_EQ(st.components()[0].index, 10u);
  EXPECT_EQ(st.components()[1].index, 11u);
  EXPECT_EQ(st.components()[0].density.kind(), EnergyDensity::Kind::Point);
  EXPECT_EQ(st.components()[1].density.kind(), EnergyDensity::Kind::Gaussian);
  EXPECT_THROW(LocalizedSourceSpec(1.0, {{cd(0.5), Vec3::Zero(), 0.0}}), DomainError);
}

TEST(GridIo, RoundTripIsBitExact) {
  const auto dir = std::filesystem::temp_directory_path() / "qgphase_grid_io";
  std::filesystem::create_directories(dir);
  const std::string base = (dir / "density").string();
  const auto e = sample_on_grid(EnergyDensity::gaussian(1.5, Vec3::Zero(), 0.1, kUnit), 8, 1.0);
  write_grid(base, {8, 1.0, "energy/volume (natural)", 1.5}, e.values());
  GridHeader h;
  const auto back = read_grid(base, h);
  EXPECT_EQ(h.n, 8);
  EXPECT_DOUBLE_EQ(h.length, 1.0);
  EXPECT_DOUBLE_EQ(h.mass, 1.5);
  EXPECT_EQ(back, e.values());
  std::ifstream bin(base + ".bin", std::ios::binary | std::ios::ate);
  EXPECT_EQ(static_cast<std::size_t>(bin.tellg()), 8u * 8u * 8u * 8u);
}

TEST(GridIo, TruncatedPayloadRejected) {
  const auto dir = std::filesystem::temp_directory_path() / "qgphase_grid_io";
  std::filesystem::create_directories(dir);
  const std::string base = (dir / "short").string();
  write_grid(base, {2, 1.0, "x", 0.0}, std::vector<double>(8, 1.0));
  std::filesystem::resize_file(base + ".bin", 40);
  GridHeader h;
  EXPECT_THROW(read_grid(base, h), IoError);
  EXPECT_THROW(read_grid((dir / "missing").string(), h), IoError);
  EXPECT_THROW(write_grid(base, {2, 1.0, "x", 0.0}, std::vector<double>(7, 1.0)), IoError);
}
