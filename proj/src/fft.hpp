#pragma once

// Thin RAII layer over FFTW's complex 3-D transforms. Plan creation and
// destruction are serialised because the FFTW planner is not re-entrant.

#include <complex>
#include <mutex>
#include <vector>

#include <fftw3.h>

namespace qgphase::detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// In-place unnormalised 3-D DFT of an n^3 array (x fastest).
/// sign = FFTW_FORWARD computes sum f e^{-2 pi i m.j / n}.
inline void dft3(std::vector<std::complex<double>>& data, int n, int sign) {
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_dft_3d(n, n, n, buf, buf, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(fftw_planner_mutex());
  fftw_destroy_plan(plan);
}

}  // namespace qgphase::detail
