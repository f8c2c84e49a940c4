#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "wph/grid.hpp"

namespace wph {

// Bump steerable bank. Channel c = (j-1) Q + l for 1 <= j <= J, 0 <= l < Q;
// the lowpass is channel J Q.
struct WaveletBank {
  int side = 0;
  int J = 0;
  int Q = 0;
  double xi0 = 0;
  double sigma_phi = 0;
  double c_norm = 0;
  // Real Fourier multipliers, FFT bin order, one per channel.
  std::vector<std::vector<double>> filters;

  int channels() const { return J * Q + 1; }
  int lowpass() const { return J * Q; }
  bool is_lowpass(int c) const { return c == J * Q; }
  int channel(int j, int l) const { return (j - 1) * Q + l; }
  // Scale index j; the lowpass reports J.
  int scale(int c) const { return is_lowpass(c) ? J : c / Q + 1; }
  // Angle index l; the lowpass reports 0.
  int angle(int c) const { return is_lowpass(c) ? 0 : c % Q; }
  int stride(int c) const { return 1 << (scale(c) - 1); }
  int lattice(int c) const { return side / stride(c); }
  // Centre frequency lambda = 2^-j r_{-l} (xi0, 0); zero for the lowpass.
  std::array<double, 2> center(int c) const;

  void scale_by(double s);
};

// Continuous mother wavelet in Fourier.
double bump_mother(double w1, double w2, int Q, double xi0, double c_norm);

WaveletBank build_bump_bank(int side, int J, int Q);

struct WaveletCoeffs {
  std::vector<int> lattice;               // per channel side
  std::vector<std::vector<cplx>> values;  // per channel, row-major lattice

  int channels() const { return static_cast<int>(values.size()); }
};

WaveletCoeffs zero_coeffs(const WaveletBank& bank);

// Subsampled transform: channel c holds (x * psi_c)(stride(c) n).
WaveletCoeffs wavelet_transform(const Field& x, const WaveletBank& bank);
// Same, starting from an already transformed field.
WaveletCoeffs wavelet_transform_hat(const Field& xhat, const WaveletBank& bank);
// Full resolution (stride 1) convolution for one channel.
std::vector<cplx> convolve_full(const Field& xhat, const WaveletBank& bank, int c);

Field adjoint_transform(const WaveletCoeffs& coeffs, const WaveletBank& bank);

struct FrameBounds {
  double A = 0;
  double B = 0;
  int iterations = 0;
};

enum class FrameMethod { automatic, fourier_blocks, power_iteration };

// W*W is block diagonal in Fourier, coupling bins congruent modulo side / 2^(J-1).
// automatic diagonalizes those blocks exactly when 2^(J-1) <= 32 and falls back
// to power iteration otherwise.
FrameBounds frame_bounds(const WaveletBank& bank, FrameMethod method = FrameMethod::automatic,
                         double tol = 1e-6, int max_iter = 10000, std::uint64_t seed = 7);

}  // namespace wph
