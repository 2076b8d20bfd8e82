#pragma once

// Fourier-space algebra of symmetric 3x3 tensors: transverse projector,
// transverse-traceless projection, longitudinal / trace / TT split, and
// lattice contractions of tensor fields.

#include <array>
#include <complex>
#include <functional>
#include <vector>

#include "qgphase/errors.hpp"
#include "qgphase/grid.hpp"

namespace qgphase::tensoralg {

using cd = std::complex<double>;

class WaveVector {
 public:
  WaveVector() = default;
  WaveVector(double kx, double ky, double kz);

  double operator[](int i) const { return k_[static_cast<std::size_t>(i)]; }
  double norm() const;
  double norm2() const { return k_[0] * k_[0] + k_[1] * k_[1] + k_[2] * k_[2]; }
  bool is_zero() const { return norm2() == 0.0; }
  WaveVector operator-() const { return {-k_[0], -k_[1], -k_[2]}; }
  double dot(const Vec3& x) const { return k_[0] * x[0] + k_[1] * x[1] + k_[2] * x[2]; }

 private:
  std::array<double, 3> k_{0.0, 0.0, 0.0};
};

/// Symmetric 3x3 tensor stored as its six independent components
/// (xx, yy, zz, xy, xz, yz); symmetry holds by construction.
template <typename T>
class SymTensor3 {
 public:
  SymTensor3() { c_.fill(T(0)); }

  static SymTensor3 from_components(T xx, T yy, T zz, T xy, T xz, T yz) {
    SymTensor3 s;
    s.c_ = {xx, yy, zz, xy, xz, yz};
    return s;
  }
  static SymTensor3 diagonal(T a, T b, T c) {
    return from_components(a, b, c, T(0), T(0), T(0));
  }
  static SymTensor3 identity() { return diagonal(T(1), T(1), T(1)); }

  T operator()(int i, int j) const { return c_[slot(i, j)]; }
  T& at(int i, int j) { return c_[slot(i, j)]; }
  const std::array<T, 6>& components() const { return c_; }

  T trace() const { return c_[0] + c_[1] + c_[2]; }

  SymTensor3& operator+=(const SymTensor3& o) {
    for (std::size_t a = 0; a < 6; ++a) c_[a] += o.c_[a];
    return *this;
  }
  SymTensor3& operator-=(const SymTensor3& o) {
    for (std::size_t a = 0; a < 6; ++a) c_[a] -= o.c_[a];
    return *this;
  }
  SymTensor3& operator*=(T s) {
    for (auto& v : c_) v *= s;
    return *this;
  }
  friend SymTensor3 operator+(SymTensor3 a, const SymTensor3& b) { return a += b; }
  friend SymTensor3 operator-(SymTensor3 a, const SymTensor3& b) { return a -= b; }
  friend SymTensor3 operator*(SymTensor3 a, T s) { return a *= s; }
  friend SymTensor3 operator*(T s, SymTensor3 a) { return a *= s; }

  /// Largest component magnitude.
  double max_abs() const {
    double m = 0.0;
    for (const auto& v : c_) m = std::max(m, static_cast<double>(std::abs(v)));
    return m;
  }

 private:
  static std::size_t slot(int i, int j) {
    if (i == j) return static_cast<std::size_t>(i);
    const int lo = std::min(i, j);
    const int hi = std::max(i, j);
    return lo == 0 ? static_cast<std::size_t>(hi + 2) : 5;  // xy=3, xz=4, yz=5
  }

  std::array<T, 6> c_;
};

using RealTensor = SymTensor3<double>;
using ComplexTensor = SymTensor3<cd>;

/// Full contraction A_ij B^ij (no conjugation).
template <typename T, typename U>
auto double_contract(const SymTensor3<T>& a, const SymTensor3<U>& b) {
  using R = decltype(T{} * U{});
  R s{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s += a(i, j) * b(i, j);
  return s;
}

/// P_i^a T_ab P^b_j for symmetric P (the transverse part of T).
template <typename T>
SymTensor3<T> sandwich(const RealTensor& p, const SymTensor3<T>& t) {
  SymTensor3<T> out;
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      T s{};
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) s += p(i, a) * t(a, b) * p(b, j);
      out.at(i, j) = s;
    }
  }
  return out;
}

template <typename T>
SymTensor3<T> promote(const RealTensor& p) {
  const auto& c = p.components();
  return SymTensor3<T>::from_components(T(c[0]), T(c[1]), T(c[2]), T(c[3]), T(c[4]), T(c[5]));
}

/// Matrix product A*B of two symmetric tensors (generally not symmetric, so
/// returned as a plain array).
std::array<std::array<double, 3>, 3> matmul(const RealTensor& a, const RealTensor& b);

/// P_ij = delta_ij - k_i k_j / |k|^2.
RealTensor transverse_projector(const WaveVector& k);

/// P applied to a vector.
std::array<double, 3> apply(const RealTensor& t, const WaveVector& k);

/// Transverse-traceless part: P T P - (1/2) P (P:T).
template <typename T>
SymTensor3<T> tt_project(const SymTensor3<T>& t, const WaveVector& k) {
  const RealTensor p = transverse_projector(k);
  SymTensor3<T> transverse = sandwich(p, t);
  const T trace_part = double_contract(p, t);
  return transverse - promote<T>(p) * (T(0.5) * trace_part);
}

template <typename T>
struct Decomposition {
  SymTensor3<T> longitudinal;
  T trace_part;  // P^ab T_ab, the transverse trace at this k
  SymTensor3<T> tt;
};

/// Splits T = longitudinal + (1/2) P trace_part + tt.
template <typename T>
Decomposition<T> decompose(const SymTensor3<T>& t, const WaveVector& k) {
  const RealTensor p = transverse_projector(k);
  Decomposition<T> d;
  d.trace_part = double_contract(p, t);
  d.tt = sandwich(p, t) - promote<T>(p) * (T(0.5) * d.trace_part);
  d.longitudinal = t - d.tt - promote<T>(p) * (T(0.5) * d.trace_part);
  return d;
}

/// Orthonormal TT polarisation tensors for k (s = 0: plus, s = 1: cross),
/// normalised so that e:e = 1.
RealTensor tt_polarisation(const WaveVector& k, int s);

/// Lattice wavevector stored at (ix, iy, iz) of the FFT frequency grid.
WaveVector lattice_wavevector(const GridSpec& grid, int ix, int iy, int iz);

/// Symmetric-tensor field sampled on the FFT frequency lattice of a grid.
class SymTensorFieldK {
 public:
  /// Throws DomainError when `is_real` is set and F(-k) != conj(F(k)).
  SymTensorFieldK(GridSpec grid, std::vector<ComplexTensor> values, bool is_real);

  static SymTensorFieldK zeros(GridSpec grid, bool is_real = true);

  const GridSpec& grid() const { return grid_; }
  bool is_real() const { return is_real_; }
  const ComplexTensor& at(int ix, int iy, int iz) const { return values_[grid_.index(ix, iy, iz)]; }
  const std::vector<ComplexTensor>& values() const { return values_; }

 private:
  GridSpec grid_;
  std::vector<ComplexTensor> values_;
  bool is_real_;
};

using SpectralWeight = std::function<double(const WaveVector&)>;

/// Riemann sum  sum_{k != 0} (1/L^3) w(k) A_ij(k) B^ij(-k).
/// The k = 0 lattice point is skipped; its content belongs to the
/// zero-mode policy of the Poisson solver.
cd contract(const SymTensorFieldK& a, const SymTensorFieldK& b, const SpectralWeight& weight);

}  // namespace qgphase::tensoralg
