#include "wph/wavelet.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

#include "fft.hpp"
#include "wph/error.hpp"

namespace wph {

namespace {
constexpr double pi = std::numbers::pi;
}

double bump_mother(double w1, double w2, int Q, double xi0, double c_norm) {
  double r = std::hypot(w1, w2);
  if (r <= 0.0 || r >= 2.0 * xi0) return 0.0;
  double ang = std::atan2(w2, w1);
  if (std::abs(ang) >= pi / 2) return 0.0;
  double dr = r - xi0;
  double radial = std::exp(-dr * dr / (xi0 * xi0 - dr * dr));
  return c_norm * radial * std::pow(std::cos(ang), Q / 2 - 1);
}

std::array<double, 2> WaveletBank::center(int c) const {
  if (is_lowpass(c)) return {0.0, 0.0};
  double th = 2.0 * pi * angle(c) / Q;
  double r = xi0 / static_cast<double>(1 << scale(c));
  return {r * std::cos(th), -r * std::sin(th)};
}

void WaveletBank::scale_by(double s) {
  for (auto& f : filters)
    for (auto& v : f) v *= s;
}

WaveletBank build_bump_bank(int side, int J, int Q) {
  if (side < 2 || !is_pow2(side)) throw ConfigError("bank side must be a power of two");
  if (Q < 2 || Q % 2 != 0) throw ConfigError("Q must be even and positive");
  if (J < 1 || (1L << J) > side) throw ConfigError("need 1 <= J and 2^J <= side");

  WaveletBank b;
  b.side = side;
  b.J = J;
  b.Q = Q;
  b.xi0 = 1.7 * pi;
  b.sigma_phi = 0.702 * std::sqrt(2.0) * std::pow(2.0, -0.55) * b.xi0;
  const int h = Q / 2;
  b.c_norm = (1.0 / 1.29) * std::pow(2.0, h - 1) * std::tgamma(h) /
             std::sqrt(h * std::tgamma(Q - 1));

  const int n = side;
  const std::size_t d = static_cast<std::size_t>(n) * n;
  b.filters.assign(b.channels(), std::vector<double>(d, 0.0));

  // Evaluate the 2 pi periodization of the continuous multipliers. Only the
  // nearest aliases can reach the support, which is inside the radius 2 xi0 < 4 pi.
  auto periodize = [&](auto&& f, std::vector<double>& out) {
    for (int m1 = 0; m1 < n; ++m1) {
      double w1 = 2.0 * pi * signed_bin(m1, n) / n;
      for (int m2 = 0; m2 < n; ++m2) {
        double w2 = 2.0 * pi * signed_bin(m2, n) / n;
        double acc = 0;
        for (int p = -1; p <= 1; ++p)
          for (int q = -1; q <= 1; ++q) acc += f(w1 + 2.0 * pi * p, w2 + 2.0 * pi * q);
        out[static_cast<std::size_t>(m1) * n + m2] = acc;
      }
    }
  };

  for (int j = 1; j <= J; ++j) {
    const double dil = static_cast<double>(1 << j);
    for (int l = 0; l < Q; ++l) {
      const double th = 2.0 * pi * l / Q;
      const double ct = std::cos(th), st = std::sin(th);
      auto f = [&](double w1, double w2) {
        double a = dil * (ct * w1 - st * w2);
        double c = dil * (st * w1 + ct * w2);
        return dil * bump_mother(a, c, Q, b.xi0, b.c_norm);
      };
      auto& out = b.filters[b.channel(j, l)];
      periodize(f, out);
      out[0] = 0.0;
    }
  }
  const double dil = static_cast<double>(1 << J);
  const double s2 = b.sigma_phi * b.sigma_phi;
  periodize([&](double w1, double w2) {
    return dil * std::exp(-dil * dil * (w1 * w1 + w2 * w2) / (2.0 * s2));
  }, b.filters[b.lowpass()]);
  return b;
}

WaveletCoeffs zero_coeffs(const WaveletBank& bank) {
  WaveletCoeffs out;
  for (int c = 0; c < bank.channels(); ++c) {
    int m = bank.lattice(c);
    out.lattice.push_back(m);
    out.values.emplace_back(static_cast<std::size_t>(m) * m, cplx{});
  }
  return out;
}

WaveletCoeffs wavelet_transform_hat(const Field& xhat, const WaveletBank& bank) {
  if (xhat.side != bank.side) throw ConfigError("wavelet_transform: side mismatch");
  const int n = bank.side;
  const double inv_d = 1.0 / (static_cast<double>(n) * n);
  WaveletCoeffs out = zero_coeffs(bank);
  for (int c = 0; c < bank.channels(); ++c) {
    const int s = bank.stride(c);
    const int m = n / s;
    const auto& psi = bank.filters[c];
    auto& y = out.values[c];
    for (int a1 = 0; a1 < s; ++a1)
      for (int p1 = 0; p1 < m; ++p1) {
        const std::size_t row = static_cast<std::size_t>(p1 + a1 * m) * n;
        cplx* dst = y.data() + static_cast<std::size_t>(p1) * m;
        for (int a2 = 0; a2 < s; ++a2) {
          const std::size_t base = row + static_cast<std::size_t>(a2) * m;
          for (int p2 = 0; p2 < m; ++p2) dst[p2] += xhat.data[base + p2] * psi[base + p2];
        }
      }
    detail::fft2_inplace(y.data(), m, +1);
    for (auto& v : y) v *= inv_d;
  }
  return out;
}

WaveletCoeffs wavelet_transform(const Field& x, const WaveletBank& bank) {
  if (x.side != bank.side) throw ConfigError("wavelet_transform: side mismatch");
  return wavelet_transform_hat(dft2(x), bank);
}

std::vector<cplx> convolve_full(const Field& xhat, const WaveletBank& bank, int c) {
  Field y(bank.side, Domain::frequency);
  const auto& psi = bank.filters[c];
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = xhat[i] * psi[i];
  return idft2(y).data;
}

Field adjoint_transform(const WaveletCoeffs& coeffs, const WaveletBank& bank) {
  if (coeffs.channels() != bank.channels()) throw ConfigError("adjoint_transform: channel mismatch");
  const int n = bank.side;
  Field acc(n, Domain::frequency);
  std::vector<cplx> buf;
  for (int c = 0; c < bank.channels(); ++c) {
    const int m = bank.lattice(c);
    const int s = n / m;
    if (coeffs.lattice[c] != m || coeffs.values[c].size() != static_cast<std::size_t>(m) * m)
      throw ConfigError("adjoint_transform: lattice mismatch");
    buf = coeffs.values[c];
    detail::fft2_inplace(buf.data(), m, -1);
    const auto& psi = bank.filters[c];
    for (int a1 = 0; a1 < s; ++a1)
      for (int p1 = 0; p1 < m; ++p1) {
        const std::size_t row = static_cast<std::size_t>(p1 + a1 * m) * n;
        const cplx* src = buf.data() + static_cast<std::size_t>(p1) * m;
        for (int a2 = 0; a2 < s; ++a2) {
          const std::size_t base = row + static_cast<std::size_t>(a2) * m;
          for (int p2 = 0; p2 < m; ++p2) acc.data[base + p2] += psi[base + p2] * src[p2];
        }
      }
  }
  return idft2(acc);
}

namespace {

FrameBounds bounds_by_blocks(const WaveletBank& bank) {
  const int n = bank.side;
  const int smax = 1 << (bank.J - 1);
  const int mmin = n / smax;
  const int bs = smax * smax;
  FrameBounds fb;
  fb.A = 1e300;
  fb.B = -1e300;
  Eigen::MatrixXd block(bs, bs);
  std::vector<int> idx(bs);
  for (int p1 = 0; p1 < mmin; ++p1)
    for (int p2 = 0; p2 < mmin; ++p2) {
      for (int b1 = 0; b1 < smax; ++b1)
        for (int b2 = 0; b2 < smax; ++b2)
          idx[b1 * smax + b2] = (p1 + b1 * mmin) * n + (p2 + b2 * mmin);
      block.setZero();
      for (int c = 0; c < bank.channels(); ++c) {
        const int s = bank.stride(c);
        const int m = n / s;
        const double w = 1.0 / (static_cast<double>(s) * s);
        const auto& psi = bank.filters[c];
        for (int i = 0; i < bs; ++i) {
          const double pi_ = psi[idx[i]];
          if (pi_ == 0.0) continue;
          const int k1 = idx[i] / n, k2 = idx[i] % n;
          for (int jj = 0; jj < bs; ++jj) {
            const int l1 = idx[jj] / n, l2 = idx[jj] % n;
            if ((k1 - l1) % m != 0 || (k2 - l2) % m != 0) continue;
            block(i, jj) += w * pi_ * psi[idx[jj]];
          }
        }
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block, Eigen::EigenvaluesOnly);
      fb.A = std::min(fb.A, es.eigenvalues()(0));
      fb.B = std::max(fb.B, es.eigenvalues()(bs - 1));
    }
  return fb;
}

double inner_re(const Field& a, const Field& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (std::conj(a[i]) * b[i]).real();
  return s;
}

// Largest eigenvalue of shift * I + sign * W*W by power iteration with Rayleigh quotients.
double power_extreme(const WaveletBank& bank, double shift, double sign, double tol, int max_iter,
                     std::uint64_t seed, int& iters) {
  const int n = bank.side;
  Field v(n);
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = cplx(normal_at(seed, 2 * i), normal_at(seed, 2 * i + 1));
  double nv = std::sqrt(v.norm2());
  for (auto& e : v.data) e /= nv;
  double prev = 0;
  for (int it = 1; it <= max_iter; ++it) {
    Field w = adjoint_transform(wavelet_transform(v, bank), bank);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = shift * v[i] + sign * w[i];
    double rq = inner_re(v, w);
    double nw = std::sqrt(w.norm2());
    if (nw == 0) {
      iters = it;
      return 0.0;
    }
    for (std::size_t i = 0; i < w.size(); ++i) v[i] = w[i] / nw;
    if (it > 1 && std::abs(rq - prev) <= tol * std::abs(rq)) {
      iters = it;
      return rq;
    }
    prev = rq;
  }
  throw NumericalError("frame_bounds: power iteration did not converge in " +
                       std::to_string(max_iter) + " iterations");
}

}  // namespace

FrameBounds frame_bounds(const WaveletBank& bank, FrameMethod method, double tol, int max_iter,
                         std::uint64_t seed) {
  if (method == FrameMethod::automatic)
    method = (bank.J <= 6) ? FrameMethod::fourier_blocks : FrameMethod::power_iteration;
  if (method == FrameMethod::fourier_blocks) return bounds_by_blocks(bank);
  FrameBounds fb;
  int it1 = 0, it2 = 0;
  fb.B = power_extreme(bank, 0.0, 1.0, tol, max_iter, seed, it1);
  fb.A = fb.B - power_extreme(bank, fb.B, -1.0, tol, max_iter, derive_seed(seed, 1), it2);
  fb.iterations = it1 + it2;
  return fb;
}

}  // namespace wph
