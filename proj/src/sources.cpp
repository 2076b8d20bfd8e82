#include "qgphase/sources.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <set>

#include <json.hpp>

namespace qgphase {

namespace {

constexpr double kPi = std::numbers::pi;

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

double gaussian_norm(double sigma) { return std::pow(2.0 * kPi * sigma * sigma, -1.5); }

}  // namespace

PhysicalConstants::PhysicalConstants(double g, double c_, double h) : G(g), c(c_), hbar(h) {
  if (!finite_positive(G) || !finite_positive(c) || !finite_positive(hbar))
    throw DomainError("physical constants must be strictly positive");
}

PhysicalConstants PhysicalConstants::si() {
  return {6.67430e-11, 299792458.0, 1.054571817e-34};
}

double PhysicalConstants::kappa() const { return 16.0 * kPi * G / (c * c * c * c); }

PhysicalConstants UnitSystem::natural_constants(const PhysicalConstants& si) const {
  if (!finite_positive(mass_scale) || !finite_positive(length_scale))
    throw DomainError("unit scales must be strictly positive");
  return {si.G * mass_scale / (length_scale * si.c * si.c), 1.0,
          si.hbar / (mass_scale * si.c * length_scale)};
}

EnergyDensity EnergyDensity::point(double mass, const Vec3& center, const PhysicalConstants& k,
                                   double sigma_reg) {
  if (!(mass >= 0.0) || !std::isfinite(mass)) throw DomainError("mass must be non-negative");
  if (!(sigma_reg >= 0.0)) throw DomainError("regularisation width must be non-negative");
  EnergyDensity e;
  e.kind_ = Kind::Point;
  e.energy_ = mass * k.c * k.c;
  e.center_ = center;
  e.sigma_ = sigma_reg;
  return e;
}

EnergyDensity EnergyDensity::gaussian(double mass, const Vec3& center, double sigma,
                                      const PhysicalConstants& k) {
  if (!(mass >= 0.0) || !std::isfinite(mass)) throw DomainError("mass must be non-negative");
  if (!finite_positive(sigma)) throw DomainError("gaussian width must be positive");
  EnergyDensity e;
  e.kind_ = Kind::Gaussian;
  e.energy_ = mass * k.c * k.c;
  e.center_ = center;
  e.sigma_ = sigma;
  return e;
}

EnergyDensity EnergyDensity::on_grid(GridSpec grid, std::vector<double> values) {
  if (grid.n <= 0 || !finite_positive(grid.length)) throw DomainError("invalid grid spec");
  if (values.size() != grid.size()) throw DomainError("grid density size mismatch");
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) throw DomainError("energy density must be finite and >= 0");
  }
  EnergyDensity e;
  e.kind_ = Kind::Grid;
  e.grid_ = grid;
  e.values_ = std::move(values);
  double s = 0.0;
  for (double v : e.values_) s += v;
  e.energy_ = s * grid.cell_volume();
  return e;
}

EnergyDensity EnergyDensity::zero(GridSpec grid) {
  return on_grid(grid, std::vector<double>(grid.size(), 0.0));
}

double EnergyDensity::rest_energy() const { return energy_; }

double EnergyDensity::effective_sigma(const GridSpec& grid) const {
  if (kind_ == Kind::Point && sigma_ == 0.0) return 2.0 * grid.spacing();
  return sigma_;
}

double EnergyDensity::value(const Vec3& x, double sigma_eff) const {
  if (kind_ == Kind::Grid) throw DomainError("value(): grid densities have no analytic form");
  if (!(sigma_eff > 0.0)) throw DomainError("value(): point density needs a positive width");
  const double r2 = (x - center_).squaredNorm();
  return energy_ * gaussian_norm(sigma_eff) * std::exp(-0.5 * r2 / (sigma_eff * sigma_eff));
}

cd EnergyDensity::fourier(const tensoralg::WaveVector& k, double sigma_eff) const {
  if (kind_ == Kind::Grid) throw DomainError("fourier(): grid densities have no analytic form");
  const double damp = std::exp(-0.5 * k.norm2() * sigma_eff * sigma_eff);
  return energy_ * damp * std::polar(1.0, -k.dot(center_));
}

EnergyDensity EnergyDensity::scaled(double a) const {
  if (!(a >= 0.0)) throw DomainError("densities scale by non-negative factors only");
  EnergyDensity e = *this;
  e.energy_ *= a;
  for (double& v : e.values_) v *= a;
  return e;
}

EnergyDensity operator+(const EnergyDensity& a, const EnergyDensity& b) {
  if (a.is_analytic() || b.is_analytic()) throw DomainError("sum defined for grid densities");
  if (!(a.grid() == b.grid())) throw DomainError("sum of densities on different grids");
  std::vector<double> v = a.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += b.values()[i];
  return EnergyDensity::on_grid(a.grid(), std::move(v));
}

EnergyDensity sample_on_grid(const EnergyDensity& e, int n, double length) {
  if (!is_power_of_two(n)) throw DomainError("grid size must be a power of two");
  if (!finite_positive(length)) throw DomainError("box length must be positive");
  const GridSpec grid{n, length};
  if (!e.is_analytic()) {
    if (!(e.grid() == grid)) throw DomainError("grid density does not match requested grid");
    return e;
  }
  const double sigma = e.effective_sigma(grid);
  if (!(length > 6.0 * sigma)) throw DomainError("profile truncated: box must exceed 6 sigma");
  const double half = 0.5 * length;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(e.center()[a]) >= half) throw DomainError("profile truncated: centre outside box");
  }
  std::vector<double> values(grid.size());
  double sum = 0.0;
  for (int iz = 0; iz < n; ++iz) {
    for (int iy = 0; iy < n; ++iy) {
      for (int ix = 0; ix < n; ++ix) {
        const double v = e.value(grid.position(ix, iy, iz), sigma);
        values[grid.index(ix, iy, iz)] = v;
        sum += v;
      }
    }
  }
  if (e.rest_energy() == 0.0) return EnergyDensity::on_grid(grid, std::move(values));
  if (!(sum > 0.0)) throw DomainError("profile truncated: no support on grid");
  const double scale = e.rest_energy() / (sum * grid.cell_volume());
  for (double& v : values) v *= scale;
  return EnergyDensity::on_grid(grid, std::move(values));
}

double total_mass(const EnergyDensity& e, const PhysicalConstants& k) {
  return e.rest_energy() / (k.c * k.c);
}

QuantumSourceState::QuantumSourceState(std::vector<SourceComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw DomainError("source state needs at least one component");
  std::set<std::size_t> seen;
  double norm2 = 0.0;
  for (const auto& c : components_) {
    if (!seen.insert(c.index).second) throw DomainError("duplicate eigenbasis index in state");
    norm2 += std::norm(c.amplitude);
  }
  if (std::abs(norm2 - 1.0) > 1e-12) throw DomainError("source state amplitudes not normalised");
}

QuantumSourceState QuantumSourceState::normalised(std::vector<SourceComponent> components) {
  double norm2 = 0.0;
  for (const auto& c : components) norm2 += std::norm(c.amplitude);
  if (!(norm2 > 0.0)) throw DomainError("source state has zero norm");
  const double s = 1.0 / std::sqrt(norm2);
  for (auto& c : components) c.amplitude *= s;
  return QuantumSourceState(std::move(components));
}

std::vector<cd> QuantumSourceState::amplitudes() const {
  std::vector<cd> a;
  a.reserve(components_.size());
  for (const auto& c : components_) a.push_back(c.amplitude);
  return a;
}

cd source_overlap(const QuantumSourceState& psi, const QuantumSourceState& phi) {
  cd s = 0.0;
  for (const auto& a : psi.components()) {
    for (const auto& b : phi.components()) {
      if (a.index == b.index) s += std::conj(a.amplitude) * b.amplitude;
    }
  }
  return s;
}

LocalizedSourceSpec::LocalizedSourceSpec(double mass, std::vector<LocalizedBranch> branches)
    : mass_(mass), branches_(std::move(branches)) {
  if (!finite_positive(mass_)) throw DomainError("localised source mass must be positive");
  if (branches_.empty()) throw DomainError("localised source needs at least one branch");
  double norm2 = 0.0;
  for (const auto& b : branches_) {
    if (!b.center.allFinite() || !std::isfinite(b.sigma) || b.sigma < 0.0)
      throw DomainError("branch centre and width must be finite");
    norm2 += std::norm(b.amplitude);
  }
  if (std::abs(norm2 - 1.0) > 1e-12) throw DomainError("branch amplitudes not normalised");
}

std::vector<cd> LocalizedSourceSpec::amplitudes() const {
  std::vector<cd> a;
  for (const auto& b : branches_) a.push_back(b.amplitude);
  return a;
}

EnergyDensity LocalizedSourceSpec::branch_density(std::size_t i, const PhysicalConstants& k) const {
  const auto& b = branches_.at(i);
  return b.sigma > 0.0 ? EnergyDensity::gaussian(mass_, b.center, b.sigma, k)
                       : EnergyDensity::point(mass_, b.center, k);
}

QuantumSourceState LocalizedSourceSpec::to_state(const PhysicalConstants& k,
                                                 std::size_t first_index) const {
  std::vector<SourceComponent> comps;
  for (std::size_t i = 0; i < branches_.size(); ++i)
    comps.push_back({branches_[i].amplitude, first_index + i, branch_density(i, k)});
  return QuantumSourceState(std::move(comps));
}

void write_grid(const std::string& base, const GridHeader& header, const std::vector<double>& values) {
  if (values.size() != static_cast<std::size_t>(header.n) * header.n * header.n)
    throw IoError("grid payload size does not match header");
  nlohmann::json j = {{"N", header.n},
                      {"L", header.length},
                      {"units", header.units},
                      {"mass", header.mass},
                      {"dtype", "float64"},
                      {"byte_order", "little"},
                      {"layout", "x-fastest"}};
  std::ofstream hj(base + ".json");
  if (!hj) throw IoError("cannot open " + base + ".json for writing");
  hj << j.dump(2) << '\n';
  std::ofstream bin(base + ".bin", std::ios::binary);
  if (!bin) throw IoError("cannot open " + base + ".bin for writing");
  for (double v : values) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    bin.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
  if (!bin) throw IoError("write failed for " + base + ".bin");
}

std::vector<double> read_grid(const std::string& base, GridHeader& header) {
  std::ifstream hj(base + ".json");
  if (!hj) throw IoError("cannot open " + base + ".json");
  nlohmann::json j;
  try {
    hj >> j;
    header.n = j.at("N").get<int>();
    header.length = j.at("L").get<double>();
    header.units = j.value("units", std::string{});
    header.mass = j.value("mass", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad grid header " + base + ".json: " + e.what());
  }
  if (header.n <= 0) throw IoError("grid header has non-positive N");
  const std::size_t count = static_cast<std::size_t>(header.n) * header.n * header.n;
  std::ifstream bin(base + ".bin", std::ios::binary);
  if (!bin) throw IoError("cannot open " + base + ".bin");
  std::vector<double> values(count);
  for (auto& v : values) {
    std::uint64_t bits = 0;
    bin.read(reinterpret_cast<char*>(&bits), sizeof bits);
    if (!bin) throw IoError("grid payload shorter than header implies");
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    v = std::bit_cast<double>(bits);
  }
  if (bin.peek() != std::char_traits<char>::eof()) throw IoError("grid payload longer than header implies");
  return values;
}

}  // namespace qgphase
