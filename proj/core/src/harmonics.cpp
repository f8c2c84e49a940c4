#include "wph/harmonics.hpp"

#include <cmath>
#include <numbers>

#include "wph/error.hpp"

namespace wph {

namespace {

// e^{i k phi(z)}, exact for small |k| so that k = 1 returns z / |z| and k = 0 returns 1.
cplx unit_power(cplx z, double r, int k) {
  if (r == 0.0) return 1.0;
  cplx u = z / r;
  switch (k) {
    case 0: return 1.0;
    case 1: return u;
    case -1: return std::conj(u);
    case 2: return u * u;
    case -2: return std::conj(u * u);
    default: {
      double phi = std::arg(z);
      return std::polar(1.0, k * phi);
    }
  }
}

}  // namespace

cplx phase_harmonic(cplx z, int k) {
  if (k == 1) return z;
  double r = std::abs(z);
  if (r == 0.0) return 0.0;
  if (k == 0) return r;
  return r * unit_power(z, r, k);
}

double HarmonicWeights::energy() const {
  double s = 0;
  for (const auto& v : w) s += std::norm(v);
  return s;
}

HarmonicWeights indicator_weights(int k_min, int k_max) {
  if (k_min > k_max) throw ConfigError("indicator_weights: k_min > k_max");
  HarmonicWeights h;
  h.k_min = k_min;
  h.k_max = k_max;
  h.w.assign(static_cast<std::size_t>(k_max - k_min + 1), 1.0);
  return h;
}

HarmonicWeights rectifier_weights(int k_max) {
  if (k_max < 1) throw ConfigError("rectifier_weights: k_max must be >= 1");
  HarmonicWeights h;
  h.k_min = -k_max;
  h.k_max = k_max;
  for (int k = -k_max; k <= k_max; ++k) {
    int a = std::abs(k);
    double v;
    if (a == 0) {
      v = 1.0 / std::numbers::pi;
    } else if (a == 1) {
      v = 0.25;
    } else if (a % 2 == 1) {
      v = 0.0;
    } else {
      double sgn = ((a / 2) % 2 == 0) ? -1.0 : 1.0;  // (-1)^{a/2+1}
      v = sgn / (std::numbers::pi * (double(a) * a - 1.0));
    }
    h.w.push_back(v);
  }
  return h;
}

HarmonicCoeffs harmonic_map(const WaveletCoeffs& c, const HarmonicWeights& w) {
  HarmonicCoeffs out;
  out.weights = w;
  for (int k = w.k_min; k <= w.k_max; ++k) {
    WaveletCoeffs wk = c;
    const cplx h = w(k);
    for (auto& ch : wk.values)
      for (auto& v : ch) v = h * phase_harmonic(v, k);
    out.by_k.push_back(std::move(wk));
  }
  return out;
}

std::vector<std::vector<std::vector<double>>> phase_window_map(const WaveletCoeffs& c,
                                                                const std::vector<double>& alphas) {
  std::vector<std::vector<std::vector<double>>> out(c.values.size());
  std::vector<cplx> rot;
  for (double a : alphas) rot.push_back(std::polar(1.0, a));
  for (std::size_t ch = 0; ch < c.values.size(); ++ch) {
    out[ch].resize(alphas.size());
    for (std::size_t ia = 0; ia < alphas.size(); ++ia) {
      auto& dst = out[ch][ia];
      dst.resize(c.values[ch].size());
      for (std::size_t i = 0; i < dst.size(); ++i)
        dst[i] = std::max((rot[ia] * c.values[ch][i]).real(), 0.0);
    }
  }
  return out;
}

Wirtinger harmonic_derivative(cplx z, int k) {
  double r = std::abs(z);
  cplx e_m = unit_power(z, r, k - 1);
  cplx e_p = unit_power(z, r, k + 1);
  return {0.5 * (k + 1) * e_m, 0.5 * (1 - k) * e_p};
}

}  // namespace wph
