#pragma once

#include <string>
#include <vector>

#include "wph/grid.hpp"
#include "wph/wavelet.hpp"

namespace wph {

// Ensemble covariance Cov([X^(w)]^k, [X^(w')]^k') over all bins and k_min <= k <= k_max.
struct FourierHarmonicCov {
  int side = 0;
  int k_min = 0;
  int k_max = 0;
  std::vector<cplx> mean;    // [w * nk + (k - k_min)]
  std::vector<cplx> values;  // row (w, k), column (w', k')

  int nk() const { return k_max - k_min + 1; }
  std::size_t index(int w, int k) const {
    return static_cast<std::size_t>(w) * nk() + (k - k_min);
  }
  cplx at(int w, int k, int wp, int kp) const {
    return values[index(w, k) * (static_cast<std::size_t>(side) * side * nk()) + index(wp, kp)];
  }
  // k w == k' w' modulo 2 pi, bins given as flat indices.
  bool on_support(int w, int k, int wp, int kp) const;
};

FourierHarmonicCov fourier_harmonic_covariance(const std::vector<Field>& realizations, int k_min,
                                               int k_max);

struct ChannelRatio {
  int channel;
  double ratio;
  // |E Z^2| / E|Z|^2; zero for a circular channel.
  double noncircularity;
  // Ratio of a Gaussian channel with the same noncircularity (pi/4 when circular).
  double reference;
  bool non_gaussian;
};

struct CrossCheck {
  int channel;
  int k;
  int channel_p;
  int kp;
  cplx cov;
  double stderr_;
  bool significant;
};

struct GaussianityReport {
  std::vector<ChannelRatio> ratios;  // complex channels only
  std::vector<CrossCheck> cross;
  double ratio_threshold = 0;
  bool consistent() const;
};

// E(|Z|)^2 / E(|Z|^2) for a zero-mean Gaussian Z with E|Z|^2 = 1 and |E Z^2| = rho.
double gaussian_sparsity_ratio(double rho);

// sum psi(w) psi(-w) / sum psi(w)^2; zero when the channel only sees one half plane.
double hermitian_overlap(const WaveletBank& bank, int c);

// Sparsity ratios E(|z|)^2 / E(|z|^2) per wavelet channel and harmonic covariances of
// channel pairs with disjoint Fourier supports and k lambda ~ k' lambda'. With a single
// realization the expectations are translation averages.
GaussianityReport gaussianity_report(const std::vector<Field>& realizations, const WaveletBank& bank,
                                     double ratio_threshold = 0.05, double z_threshold = 5.0);

// Streaming form of gaussianity_report for ensembles that do not fit in memory.
class GaussianityAccumulator {
 public:
  explicit GaussianityAccumulator(const WaveletBank& bank, double ratio_threshold = 0.05,
                                  double z_threshold = 5.0);
  void add(const Field& x);
  std::size_t count() const { return count_; }
  GaussianityReport report() const;

 private:
  struct Pair {
    int c, k, cp, kp;
  };
  const WaveletBank& bank_;
  double ratio_threshold_, z_threshold_;
  std::vector<double> s1_, s2_;
  std::vector<cplx> sq_;
  std::vector<long> cnt_;
  std::vector<Pair> pairs_;
  std::vector<cplx> mean_a_, mean_b_;
  std::vector<std::vector<cplx>> sum_ab_;
  std::size_t count_ = 0;
};

std::string describe(const GaussianityReport& r, const WaveletBank& bank);

// Smallest C such that every wavelet filter keeps the given fraction of its energy in
// |w - lambda| <= C |lambda|.
double support_constant(const WaveletBank& bank, double energy_fraction = 0.99);

// |k lambda - k' lambda'| <= C (max(|k|,1) |lambda| + max(|k'|,1) |lambda'|).
bool spectral_overlap(const WaveletBank& bank, int c, int k, int cp, int kp, double C);

}  // namespace wph
