#include <Eigen/Dense>

#include "doctest.h"
#include "oracles.hpp"
#include "wph/error.hpp"
#include "wph/wavelet.hpp"

using namespace wph;

namespace {

double coeff_dot_real(const WaveletCoeffs& a, const WaveletCoeffs& b, cplx* out = nullptr) {
  cplx s = 0;
  for (int c = 0; c < a.channels(); ++c)
    for (std::size_t p = 0; p < a.values[c].size(); ++p) s += a.values[c][p] * std::conj(b.values[c][p]);
  if (out) *out = s;
  return s.real();
}

WaveletCoeffs random_coeffs(const WaveletBank& bank, unsigned seed) {
  WaveletCoeffs c = zero_coeffs(bank);
  std::uint64_t i = 0;
  for (auto& ch : c.values)
    for (auto& v : ch) {
      v = cplx(normal_at(seed, i), normal_at(seed, i + 1));
      i += 2;
    }
  return c;
}

Eigen::MatrixXcd dense_frame_operator(const WaveletBank& bank) {
  const int n = bank.side, d = n * n;
  Eigen::MatrixXcd M(d, d);
  for (int i = 0; i < d; ++i) {
    Field e(n);
    e[i] = 1;
    Field col = adjoint_transform(wavelet_transform(e, bank), bank);
    for (int r = 0; r < d; ++r) M(r, i) = col[r];
  }
  return M;
}

}  // namespace

TEST_CASE("bank construction checks") {
  CHECK_THROWS_AS(build_bump_bank(32, 2, 5), ConfigError);
  CHECK_THROWS_AS(build_bump_bank(16, 5, 4), ConfigError);
  CHECK_THROWS_AS(build_bump_bank(24, 2, 4), ConfigError);
}

TEST_CASE("bump filters: peak, support, zero mean") {
  const int n = 64;
  WaveletBank b = build_bump_bank(n, 3, 8);
  CHECK(b.xi0 == doctest::Approx(1.7 * oracle::pi));
  for (int c = 0; c < b.channels(); ++c) {
    if (b.is_lowpass(c)) continue;
    CHECK(b.filters[c][0] == 0.0);
    const int j = b.scale(c);
    // Peak sits at the centre frequency with value 2^j c_norm.
    auto lam = b.center(c);
    double best = 0;
    int bm1 = 0, bm2 = 0;
    for (int m1 = 0; m1 < n; ++m1)
      for (int m2 = 0; m2 < n; ++m2)
        if (b.filters[c][m1 * n + m2] > best) best = b.filters[c][m1 * n + m2], bm1 = m1, bm2 = m2;
    double w1 = 2 * oracle::pi * signed_bin(bm1, n) / n, w2 = 2 * oracle::pi * signed_bin(bm2, n) / n;
    CHECK(std::hypot(w1 - lam[0], w2 - lam[1]) <= 2 * oracle::pi / n * 1.5);
    CHECK(best <= (1 << j) * b.c_norm * (1 + 1e-12));
    CHECK(best >= 0.9 * (1 << j) * b.c_norm);
    // Support: zero where |2^j omega| > 2 xi0 for every alias.
    for (int m1 = 0; m1 < n; ++m1)
      for (int m2 = 0; m2 < n; ++m2) {
        double v1 = 2 * oracle::pi * signed_bin(m1, n) / n, v2 = 2 * oracle::pi * signed_bin(m2, n) / n;
        bool reachable = false;
        for (int p = -1; p <= 1; ++p)
          for (int q = -1; q <= 1; ++q)
            if ((1 << j) * std::hypot(v1 + 2 * oracle::pi * p, v2 + 2 * oracle::pi * q) <= 2 * b.xi0) reachable = true;
        if (!reachable) CHECK(b.filters[c][m1 * n + m2] == 0.0);
      }
  }
  // Continuous bump peak equals c_norm.
  CHECK(bump_mother(b.xi0, 0, 8, b.xi0, b.c_norm) == doctest::Approx(b.c_norm));
  CHECK(bump_mother(2.1 * b.xi0, 0, 8, b.xi0, b.c_norm) == 0.0);
  CHECK(bump_mother(-b.xi0, 0, 8, b.xi0, b.c_norm) == 0.0);
}

TEST_CASE("constant field") {
  WaveletBank b = build_bump_bank(32, 3, 4);
  Field x(32);
  for (auto& v : x.data) v = 1.5;
  auto w = wavelet_transform(x, b);
  for (int c = 0; c < b.channels(); ++c)
    for (const auto& v : w.values[c]) {
      if (b.is_lowpass(c))
        CHECK(std::abs(v - cplx(8 * 1.5)) < 1e-10);
      else
        CHECK(std::abs(v) < 1e-12);
    }
  CHECK(w.values[b.lowpass()].size() == 64u);
  CHECK(w.values[b.channel(1, 0)].size() == 1024u);
  CHECK(w.values[b.channel(2, 3)].size() == 256u);
}

TEST_CASE("transform matches direct periodic convolution") {
  const int n = 32;
  WaveletBank b = build_bump_bank(n, 3, 4);
  Field x = oracle::random_field(n, 21);
  auto w = wavelet_transform(x, b);
  for (int c = 0; c < b.channels(); ++c) {
    auto k = oracle::kernel_of(b.filters[c], n);
    const int s = b.stride(c), L = b.lattice(c);
    double err = 0, scale = 0;
    for (int n1 = 0; n1 < L; n1 += 3)
      for (int n2 = 0; n2 < L; n2 += 5) {
        cplx ref = oracle::conv_at(x, k, s * n1, s * n2);
        err = std::max(err, std::abs(ref - w.values[c][n1 * L + n2]));
        scale = std::max(scale, std::abs(ref));
      }
    CHECK(err < 1e-10 * std::max(1.0, scale));
  }
}

TEST_CASE("cosine excites the nearest channel") {
  const int n = 64;
  WaveletBank b = build_bump_bank(n, 3, 8);
  const int target = b.channel(2, 3);
  auto lam = b.center(target);
  int m1 = static_cast<int>(std::lround(lam[0] * n / (2 * oracle::pi)));
  int m2 = static_cast<int>(std::lround(lam[1] * n / (2 * oracle::pi)));
  Field x(n);
  for (int u1 = 0; u1 < n; ++u1)
    for (int u2 = 0; u2 < n; ++u2) x(u1, u2) = std::polar(1.0, 2 * oracle::pi * (double(m1) * u1 + double(m2) * u2) / n);
  auto w = wavelet_transform(x, b);
  int best = -1;
  double be = 0;
  for (int c = 0; c < b.lowpass(); ++c) {
    double e = 0;
    for (const auto& v : w.values[c]) e += std::norm(v);
    e *= b.stride(c) * b.stride(c);
    if (e > be) be = e, best = c;
  }
  CHECK(best == target);
}

TEST_CASE("adjoint") {
  WaveletBank b = build_bump_bank(16, 2, 4);
  Field z = adjoint_transform(zero_coeffs(b), b);
  CHECK(z.norm2() == 0);
  Field x = oracle::random_field(16, 31, true);
  WaveletCoeffs c = random_coeffs(b, 32);
  cplx lhs, rhs = 0;
  coeff_dot_real(wavelet_transform(x, b), c, &lhs);
  Field a = adjoint_transform(c, b);
  for (std::size_t i = 0; i < x.size(); ++i) rhs += x[i] * std::conj(a[i]);
  CHECK(std::abs(lhs - rhs) < 1e-10 * std::abs(lhs));
}

TEST_CASE("frame bounds against the dense operator") {
  WaveletBank b = build_bump_bank(16, 2, 4);
  Eigen::MatrixXcd M = dense_frame_operator(b);
  CHECK((M - M.adjoint()).norm() < 1e-10 * M.norm());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M);
  const double A = es.eigenvalues().minCoeff(), B = es.eigenvalues().maxCoeff();
  FrameBounds fb = frame_bounds(b, FrameMethod::fourier_blocks);
  CHECK(fb.A == doctest::Approx(A).epsilon(1e-6));
  CHECK(fb.B == doctest::Approx(B).epsilon(1e-6));
  FrameBounds pi = frame_bounds(b, FrameMethod::power_iteration, 1e-10, 10000);
  CHECK(pi.B == doctest::Approx(B).epsilon(1e-6));
  CHECK(pi.A == doctest::Approx(A).epsilon(1e-4));

  for (unsigned s = 0; s < 1000; ++s) {
    Field x = oracle::random_field(16, 1000 + s);
    double e = 0;
    auto w = wavelet_transform(x, b);
    for (const auto& ch : w.values)
      for (const auto& v : ch) e += std::norm(v);
    CHECK(e >= fb.A * x.norm2() * (1 - 1e-9));
    CHECK(e <= fb.B * x.norm2() * (1 + 1e-9));
  }

  WaveletBank s = b;
  s.scale_by(3.0);
  FrameBounds fs = frame_bounds(s, FrameMethod::fourier_blocks);
  CHECK(fs.A == doctest::Approx(9 * fb.A).epsilon(1e-10));
  CHECK(fs.B == doctest::Approx(9 * fb.B).epsilon(1e-10));
}

TEST_CASE("frame bounds stop at the iteration cap") {
  WaveletBank b = build_bump_bank(32, 3, 8);
  CHECK_THROWS_AS(frame_bounds(b, FrameMethod::power_iteration, 1e-15, 3), NumericalError);
}

TEST_CASE("quarter turn steerability") {
  const int n = 32, Q = 8;
  WaveletBank b = build_bump_bank(n, 3, Q);
  Field x = oracle::random_field(n, 41);
  Field r(n);
  for (int u1 = 0; u1 < n; ++u1)
    for (int u2 = 0; u2 < n; ++u2) r(u1, u2) = x(u2, wrap(-u1, n));
  Field xh = dft2(x), rh = dft2(r);
  for (int j = 1; j <= 3; ++j)
    for (int l = 0; l < Q; ++l) {
      auto a = convolve_full(rh, b, b.channel(j, l));
      auto c = convolve_full(xh, b, b.channel(j, (l + Q / 4) % Q));
      double err = 0, sc = 0;
      for (int u1 = 0; u1 < n; ++u1)
        for (int u2 = 0; u2 < n; ++u2) {
          err = std::max(err, std::abs(a[u1 * n + u2] - c[u2 * n + wrap(-u1, n)]));
          sc = std::max(sc, std::abs(a[u1 * n + u2]));
        }
      CHECK(err < 1e-10 * sc);
    }
}

TEST_CASE("reflection identity") {
  const int n = 32, Q = 8;
  WaveletBank b = build_bump_bank(n, 3, Q);
  for (int j = 1; j <= 3; ++j)
    for (int l = 0; l < Q; ++l) {
      const auto& f = b.filters[b.channel(j, l)];
      const auto& g = b.filters[b.channel(j, wrap(-l, Q))];
      double err = 0;
      for (int m1 = 0; m1 < n; ++m1)
        for (int m2 = 0; m2 < n; ++m2) err = std::max(err, std::abs(f[m1 * n + m2] - g[m1 * n + wrap(-m2, n)]));
      CHECK(err < 1e-12);
    }
}
