#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "ssvm/augmentation.hpp"
#include "ssvm/fft.hpp"
#include "ssvm/grid.hpp"

namespace ssvm {

/// Imaginary residue above this fraction of the real magnitude means the
/// transform round trip lost consistency and is treated as a numerical error.
inline constexpr double kImagResidueTol = 1e-8;

/// Diagonalization of Q = C~^T C~ + I over the padded pair lattice. phi holds
/// the DFT eigenvalues of Q; each circulant forward difference contributes the
/// symbol |1 - e^{-iw}|^2 = 2(1 - cos w) per axis, plus one for the identity,
/// so phi >= 1 everywhere with equality at the DC frequency.
struct SpectralKernel {
  std::array<int, 6> axis_len{};
  Vector phi;
  MultiAxisFft fft;

  explicit SpectralKernel(const std::array<int, 6>& axes) : axis_len(axes), fft(axes) {}
};

inline SpectralKernel build_kernel(const GridParcellation& parc) {
  SpectralKernel kernel(lattice_axes(parc));
  const auto strides = lattice_strides(kernel.axis_len);
  const std::int64_t total = kernel.fft.size();
  kernel.phi = Vector::Ones(total);
  for (int axis = 0; axis < 6; ++axis) {
    const std::int64_t len = kernel.axis_len[axis];
    if (len < 2) continue;
    const std::int64_t stride = strides[axis];
    const std::int64_t block = len * stride;
    std::vector<double> symbol(len);
    for (std::int64_t k = 0; k < len; ++k)
      symbol[k] = 2.0 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(k) / static_cast<double>(len)));
    for (std::int64_t base = 0; base < total; base += block)
      for (std::int64_t k = 0; k < len; ++k) {
        double* row = kernel.phi.data() + base + k * stride;
        const double s = symbol[k];
        for (std::int64_t inner = 0; inner < stride; ++inner) row[inner] += s;
      }
  }
  return kernel;
}

/// Solves Q x = b through the frequency domain; the result is real up to a
/// residue that is checked and discarded.
inline void solve_laplacian(const Vector& b, const SpectralKernel& kernel,
                            std::vector<std::complex<double>>& work, Vector& out) {
  const std::int64_t n = kernel.fft.size();
  if (b.size() != n) throw StructuralError("solve_laplacian: length mismatch");
  work.resize(n);
  for (std::int64_t i = 0; i < n; ++i) work[i] = std::complex<double>(b[i], 0.0);
  kernel.fft.forward(work.data());
  for (std::int64_t i = 0; i < n; ++i) work[i] /= kernel.phi[i];
  kernel.fft.inverse(work.data());
  out.resize(n);
  double max_re = 0.0, max_im = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    out[i] = work[i].real();
    max_re = std::max(max_re, std::abs(work[i].real()));
    max_im = std::max(max_im, std::abs(work[i].imag()));
  }
  if (max_im > kImagResidueTol * max_re + 1e-300)
    throw NumericalError("solve_laplacian: imaginary residue exceeds tolerance");
}

inline Vector solve_laplacian(const Vector& b, const SpectralKernel& kernel) {
  std::vector<std::complex<double>> work;
  Vector out;
  solve_laplacian(b, kernel, work, out);
  return out;
}

}  // namespace ssvm
