#pragma once

#include <array>
#include <cstddef>
#include <numbers>

#include <Eigen/Core>

namespace qgphase {

using Vec3 = Eigen::Vector3d;

/// Cubic periodic box of side `length` sampled at n points per axis.
///
/// Sample i sits at x_i = (i - n/2) * spacing, so the box is centred on the
/// origin and the origin is itself a sample point. Flat storage is row-major
/// with x fastest: idx = ix + n * (iy + n * iz).
struct GridSpec {
  int n = 0;
  double length = 0.0;

  double spacing() const { return length / n; }
  double cell_volume() const {
    const double h = spacing();
    return h * h * h;
  }
  std::size_t size() const {
    return static_cast<std::size_t>(n) * n * n;
  }
  std::size_t index(int ix, int iy, int iz) const {
    return static_cast<std::size_t>(ix) +
           static_cast<std::size_t>(n) *
               (static_cast<std::size_t>(iy) + static_cast<std::size_t>(n) * iz);
  }
  double coordinate(int i) const { return (i - n / 2) * spacing(); }
  Vec3 position(int ix, int iy, int iz) const {
    return {coordinate(ix), coordinate(iy), coordinate(iz)};
  }

  /// Signed FFT frequency index for storage index i (0, 1, ..., n/2-1, -n/2, ..., -1).
  int frequency(int i) const { return i < (n + 1) / 2 ? i : i - n; }
  /// Storage index holding the negated frequency of storage index i.
  int negated(int i) const { return (n - i) % n; }
  double wavenumber(int i) const {
    return 2.0 * std::numbers::pi / length * frequency(i);
  }
  /// Measure d^3k/(2 pi)^3 carried by one lattice point.
  double mode_weight() const { return 1.0 / (length * length * length); }

  bool operator==(const GridSpec&) const = default;
};

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace qgphase
