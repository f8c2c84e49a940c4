#pragma once

#include <vector>

#include "wph/grid.hpp"
#include "wph/wavelet.hpp"

namespace wph {

// |z| e^{i k phi(z)} with phi(0) = 0.
cplx phase_harmonic(cplx z, int k);

struct HarmonicWeights {
  int k_min = 1;
  int k_max = 1;
  std::vector<cplx> w;  // w[k - k_min]

  cplx operator()(int k) const {
    return (k < k_min || k > k_max) ? cplx{} : w[static_cast<std::size_t>(k - k_min)];
  }
  double energy() const;
};

HarmonicWeights indicator_weights(int k_min, int k_max);
// Fourier coefficients of max(cos a, 0) on -k_max..k_max.
HarmonicWeights rectifier_weights(int k_max);

struct HarmonicCoeffs {
  HarmonicWeights weights;
  std::vector<WaveletCoeffs> by_k;  // by_k[k - k_min]

  const WaveletCoeffs& at(int k) const {
    return by_k[static_cast<std::size_t>(k - weights.k_min)];
  }
};

HarmonicCoeffs harmonic_map(const WaveletCoeffs& c, const HarmonicWeights& w);

// Rectified projections rho(Re(e^{i alpha} z)), indexed [channel][alpha][position].
std::vector<std::vector<std::vector<double>>> phase_window_map(const WaveletCoeffs& c,
                                                                const std::vector<double>& alphas);

struct Wirtinger {
  cplx dz;
  cplx dzbar;
};

// Derivatives of [z]^k; at z = 0 the same formula is used with phi = 0.
Wirtinger harmonic_derivative(cplx z, int k);

}  // namespace wph
