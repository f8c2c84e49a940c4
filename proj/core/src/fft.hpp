#pragma once

#include <complex>

namespace wph::detail {

// In-place unnormalized 2D transform of an n x n row-major array.
// sign = -1 forward, +1 backward.
void fft2_inplace(std::complex<double>* data, int n, int sign);

}  // namespace wph::detail
