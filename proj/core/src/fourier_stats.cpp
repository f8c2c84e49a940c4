#include "wph/fourier_stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "wph/error.hpp"
#include "wph/harmonics.hpp"

namespace wph {

bool FourierHarmonicCov::on_support(int w, int k, int wp, int kp) const {
  const int n = side;
  int a1 = w / n, a2 = w % n, b1 = wp / n, b2 = wp % n;
  return wrap(k * a1 - kp * b1, n) == 0 && wrap(k * a2 - kp * b2, n) == 0;
}

FourierHarmonicCov fourier_harmonic_covariance(const std::vector<Field>& realizations, int k_min,
                                               int k_max) {
  if (realizations.size() < 2) throw ConfigError("fourier_harmonic_covariance: need >= 2 realizations");
  if (k_min > k_max) throw ConfigError("fourier_harmonic_covariance: empty k range");
  FourierHarmonicCov out;
  out.side = realizations.front().side;
  out.k_min = k_min;
  out.k_max = k_max;
  const std::size_t d = static_cast<std::size_t>(out.side) * out.side;
  const std::size_t dim = d * out.nk();
  out.mean.assign(dim, cplx{});
  out.values.assign(dim * dim, cplx{});
  std::vector<cplx> h(dim);
  for (const auto& x : realizations) {
    if (x.side != out.side) throw ConfigError("fourier_harmonic_covariance: sides differ");
    Field xh = dft2(x);
    for (std::size_t w = 0; w < d; ++w)
      for (int k = k_min; k <= k_max; ++k) h[out.index(static_cast<int>(w), k)] = phase_harmonic(xh[w], k);
    for (std::size_t i = 0; i < dim; ++i) {
      out.mean[i] += h[i];
      cplx* row = out.values.data() + i * dim;
      for (std::size_t j = 0; j < dim; ++j) row[j] += h[i] * std::conj(h[j]);
    }
  }
  const double inv = 1.0 / static_cast<double>(realizations.size());
  for (auto& v : out.mean) v *= inv;
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j)
      out.values[i * dim + j] = out.values[i * dim + j] * inv - out.mean[i] * std::conj(out.mean[j]);
  return out;
}

bool GaussianityReport::consistent() const {
  for (const auto& r : ratios)
    if (r.non_gaussian) return false;
  for (const auto& c : cross)
    if (c.significant) return false;
  return true;
}

double gaussian_sparsity_ratio(double rho) {
  // Principal variances a, b of (Re Z, Im Z); E|Z| = sqrt(pi/2) mean_theta sqrt(a cos^2 + b sin^2).
  const double a = (1 + rho) / 2, b = (1 - rho) / 2;
  const int nodes = 8192;
  double s = 0;
  for (int i = 0; i < nodes; ++i) {
    double t = 2 * std::numbers::pi * i / nodes;
    s += std::sqrt(a * std::cos(t) * std::cos(t) + b * std::sin(t) * std::sin(t));
  }
  double m = std::sqrt(std::numbers::pi / 2) * s / nodes;
  return m * m;
}

double hermitian_overlap(const WaveletBank& bank, int c) {
  const int n = bank.side;
  const auto& f = bank.filters[c];
  double num = 0, den = 0;
  for (int m1 = 0; m1 < n; ++m1)
    for (int m2 = 0; m2 < n; ++m2) {
      double v = f[static_cast<std::size_t>(m1) * n + m2];
      num += v * f[static_cast<std::size_t>(wrap(-m1, n)) * n + wrap(-m2, n)];
      den += v * v;
    }
  return den > 0 ? num / den : 0.0;
}

namespace {

// Real fields couple w and -w, so the supports must also avoid each other's mirror image.
// Bump filters decay to zero without vanishing identically, hence the relative threshold.
bool disjoint_support(const WaveletBank& bank, int c, int cp) {
  const int n = bank.side;
  const auto& a = bank.filters[c];
  const auto& b = bank.filters[cp];
  double overlap = 0, ea = 0, eb = 0;
  for (int m1 = 0; m1 < n; ++m1)
    for (int m2 = 0; m2 < n; ++m2) {
      const std::size_t i = static_cast<std::size_t>(m1) * n + m2;
      overlap += std::abs(a[i] * b[i]) + std::abs(a[i] * b[static_cast<std::size_t>(wrap(-m1, n)) * n + wrap(-m2, n)]);
      ea += a[i] * a[i];
      eb += b[i] * b[i];
    }
  return overlap <= 1e-6 * std::sqrt(ea * eb);
}

}  // namespace

GaussianityAccumulator::GaussianityAccumulator(const WaveletBank& bank, double ratio_threshold,
                                               double z_threshold)
    : bank_(bank), ratio_threshold_(ratio_threshold), z_threshold_(z_threshold) {
  const int nc = bank.channels();
  s1_.assign(nc, 0.0);
  s2_.assign(nc, 0.0);
  sq_.assign(nc, cplx{});
  cnt_.assign(nc, 0);
  // Candidate pairs: disjoint supports with k lambda close to k' lambda'.
  for (int c = 0; c < bank.lowpass(); ++c)
    for (int cp = c + 1; cp < bank.lowpass(); ++cp) {
      if (!disjoint_support(bank, c, cp)) continue;
      auto l = bank.center(c), lp = bank.center(cp);
      for (int k = 0; k <= 2; ++k)
        for (int kp = 0; kp <= 2; ++kp) {
          double d1 = k * l[0] - kp * lp[0], d2 = k * l[1] - kp * lp[1];
          double scale = std::hypot(l[0], l[1]) + std::hypot(lp[0], lp[1]);
          if (std::hypot(d1, d2) <= 0.25 * scale) pairs_.push_back({c, k, cp, kp});
        }
    }
  mean_a_.assign(pairs_.size(), cplx{});
  mean_b_.assign(pairs_.size(), cplx{});
  sum_ab_.resize(pairs_.size());
}

void GaussianityAccumulator::add(const Field& x) {
  if (x.side != bank_.side) throw ConfigError("gaussianity report: field side does not match the bank");
  auto z = wavelet_transform(x, bank_);
  for (int c = 0; c < bank_.lowpass(); ++c)
    for (const auto& v : z.values[c]) {
      double a = std::abs(v);
      s1_[c] += a;
      s2_[c] += a * a;
      sq_[c] += v * v;
      ++cnt_[c];
    }
  // Products at coincident positions on the coarser lattice.
  for (std::size_t p = 0; p < pairs_.size(); ++p) {
    const auto& pr = pairs_[p];
    const int La = z.lattice[pr.c], Lb = z.lattice[pr.cp], L = std::min(La, Lb);
    const int fa = La / L, fb = Lb / L;
    cplx ma = 0, mb = 0, mab = 0;
    for (int n1 = 0; n1 < L; ++n1)
      for (int n2 = 0; n2 < L; ++n2) {
        cplx a = phase_harmonic(z.values[pr.c][static_cast<std::size_t>(n1 * fa) * La + n2 * fa], pr.k);
        cplx b = phase_harmonic(z.values[pr.cp][static_cast<std::size_t>(n1 * fb) * Lb + n2 * fb], pr.kp);
        ma += a;
        mb += b;
        mab += a * std::conj(b);
      }
    const double inv = 1.0 / (static_cast<double>(L) * L);
    mean_a_[p] += ma * inv;
    mean_b_[p] += mb * inv;
    sum_ab_[p].push_back(mab * inv);
  }
  ++count_;
}

GaussianityReport GaussianityAccumulator::report() const {
  if (count_ == 0) throw ConfigError("gaussianity_report: no realizations");
  GaussianityReport rep;
  rep.ratio_threshold = ratio_threshold_;
  const std::size_t R = count_;
  for (int c = 0; c < bank_.lowpass(); ++c) {
    double m1 = s1_[c] / cnt_[c], m2 = s2_[c] / cnt_[c];
    double r = m2 > 0 ? m1 * m1 / m2 : 0.0;
    double rho = m2 > 0 ? std::min(std::abs(sq_[c]) / cnt_[c] / m2, 1.0) : 0.0;
    double ref = gaussian_sparsity_ratio(rho);
    rep.ratios.push_back({c, r, rho, ref, r < ref - ratio_threshold_});
  }
  for (std::size_t p = 0; p < pairs_.size(); ++p) {
    const auto& pr = pairs_[p];
    cplx ma = mean_a_[p] / double(R), mb = mean_b_[p] / double(R);
    std::vector<cplx> c_r(R);
    cplx cbar = 0;
    for (std::size_t r = 0; r < R; ++r) {
      c_r[r] = sum_ab_[p][r] - ma * std::conj(mb);
      cbar += c_r[r];
    }
    cbar /= double(R);
    double se = 0;
    if (R > 1) {
      double v = 0;
      for (const auto& c : c_r) v += std::norm(c - cbar);
      se = std::sqrt(v / double(R - 1) / double(R));
    }
    bool sig = se > 0 ? std::abs(cbar) > z_threshold_ * se : false;
    rep.cross.push_back({pr.c, pr.k, pr.cp, pr.kp, cbar, se, sig});
  }
  return rep;
}

GaussianityReport gaussianity_report(const std::vector<Field>& realizations, const WaveletBank& bank,
                                     double ratio_threshold, double z_threshold) {
  if (realizations.empty()) throw ConfigError("gaussianity_report: no realizations");
  GaussianityAccumulator acc(bank, ratio_threshold, z_threshold);
  for (const auto& x : realizations) acc.add(x);
  return acc.report();
}

std::string describe(const GaussianityReport& r, const WaveletBank& bank) {
  std::string out;
  char buf[160];
  for (const auto& c : r.ratios) {
    std::snprintf(buf, sizeof buf, "channel j=%d l=%d ratio=%.4f gaussian=%.4f %s\n",
                  bank.scale(c.channel), bank.angle(c.channel), c.ratio, c.reference,
                  c.non_gaussian ? "non-Gaussian (sparse)" : "consistent with Gaussian");
    out += buf;
  }
  int sig = 0;
  for (const auto& c : r.cross) sig += c.significant;
  std::snprintf(buf, sizeof buf, "disjoint-support pairs tested=%zu significant=%d\n", r.cross.size(), sig);
  out += buf;
  out += r.consistent() ? "verdict: consistent with Gaussian\n" : "verdict: non-Gaussian\n";
  return out;
}

double support_constant(const WaveletBank& bank, double energy_fraction) {
  const int n = bank.side;
  const double pi = std::numbers::pi;
  double C = 0;
  for (int c = 0; c < bank.lowpass(); ++c) {
    auto lam = bank.center(c);
    const double r = std::hypot(lam[0], lam[1]);
    std::vector<std::pair<double, double>> pts;
    double total = 0;
    for (int m1 = 0; m1 < n; ++m1)
      for (int m2 = 0; m2 < n; ++m2) {
        double e = std::pow(bank.filters[c][static_cast<std::size_t>(m1) * n + m2], 2);
        if (e == 0) continue;
        double w1 = 2 * pi * signed_bin(m1, n) / n, w2 = 2 * pi * signed_bin(m2, n) / n;
        pts.push_back({std::hypot(std::remainder(w1 - lam[0], 2 * pi), std::remainder(w2 - lam[1], 2 * pi)) / r, e});
        total += e;
      }
    std::sort(pts.begin(), pts.end());
    double acc = 0;
    for (const auto& [dist, e] : pts) {
      acc += e;
      if (acc >= energy_fraction * total) {
        C = std::max(C, dist);
        break;
      }
    }
  }
  return C;
}

bool spectral_overlap(const WaveletBank& bank, int c, int k, int cp, int kp, double C) {
  auto l = bank.center(c), lp = bank.center(cp);
  double d = std::hypot(k * l[0] - kp * lp[0], k * l[1] - kp * lp[1]);
  return d <= C * (std::max(std::abs(k), 1) * std::hypot(l[0], l[1]) +
                   std::max(std::abs(kp), 1) * std::hypot(lp[0], lp[1]));
}

}  // namespace wph
