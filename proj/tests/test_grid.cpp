#include "doctest.h"
#include "oracles.hpp"
#include "wph/error.hpp"
#include "wph/grid.hpp"

using namespace wph;

TEST_CASE("dft of a constant is a DC spike") {
  Field x(8);
  for (auto& v : x.data) v = 2.5;
  Field h = dft2(x);
  CHECK(std::abs(h(0, 0) - cplx(64 * 2.5)) < 1e-12);
  for (std::size_t i = 1; i < h.size(); ++i) CHECK(std::abs(h[i]) < 1e-12);
}

TEST_CASE("dft of an impulse is flat") {
  Field x(8);
  x(0, 0) = 1;
  Field h = dft2(x);
  for (const auto& v : h.data) CHECK(std::abs(v - cplx(1)) < 1e-14);
}

TEST_CASE("dft matches the direct sum") {
  for (int n : {4, 8}) {
    Field x = oracle::random_field(n, 3, true);
    Field a = dft2(x), b = oracle::brute_dft(x);
    double err = 0;
    for (std::size_t i = 0; i < a.size(); ++i) err = std::max(err, std::abs(a[i] - b[i]));
    CHECK(err < 1e-12);
  }
}

TEST_CASE("round trip and Parseval") {
  Field x = oracle::random_field(32, 9, true);
  Field h = dft2(x);
  CHECK(h.norm2() == doctest::Approx(x.size() * x.norm2()).epsilon(1e-12));
  Field y = idft2(h);
  double err = 0;
  for (std::size_t i = 0; i < x.size(); ++i) err = std::max(err, std::abs(x[i] - y[i]));
  CHECK(err < 1e-12 * std::sqrt(x.norm2()));
}

TEST_CASE("non power of two sides are rejected") {
  Field x(6);
  CHECK_THROWS_AS(dft2(x), ConfigError);
}

TEST_CASE("white noise") {
  Field z = white_noise(16, 0.0, 1);
  CHECK(z.norm2() == 0);
  Field a = white_noise(256, 1.0, 42), b = white_noise(256, 1.0, 42);
  CHECK(a.data == b.data);
  CHECK(a.max_imag() == 0);
  // 65536 samples per field; two fields give > 1e5 samples.
  Field c = white_noise(256, 1.0, 43);
  double s = 0, s2 = 0;
  for (const auto* f : {&a, &c})
    for (const auto& v : f->data) {
      s += v.real();
      s2 += v.real() * v.real();
    }
  const double n = 2.0 * a.size();
  double var = s2 / n - (s / n) * (s / n);
  CHECK(var > 0.98);
  CHECK(var < 1.02);
  Field d = white_noise(256, 1.0, 44);
  CHECK(d.data != a.data);
}

TEST_CASE("translate") {
  Field x = oracle::random_field(16, 5);
  CHECK(translate(x, 0, 0).data == x.data);
  CHECK(translate(x, 16, 0).data == x.data);
  Field y = translate(x, 3, 5);
  CHECK(y(3, 5) == x(0, 0));
  Field hx = dft2(x), hy = dft2(y);
  double err = 0;
  for (int m1 = 0; m1 < 16; ++m1)
    for (int m2 = 0; m2 < 16; ++m2) {
      cplx ph = std::polar(1.0, -2.0 * oracle::pi * (3.0 * m1 + 5.0 * m2) / 16);
      err = std::max(err, std::abs(hy(m1, m2) - ph * hx(m1, m2)));
    }
  CHECK(err < 1e-12);
  Field z = translate(translate(x, 3, 5), -1, 14);
  CHECK(z.data == translate(x, 2, 19).data);
  CHECK(y.norm2() == doctest::Approx(x.norm2()));
}

TEST_CASE("negate") {
  Field x = oracle::random_field(8, 6);
  CHECK(negate(negate(x)).data == x.data);
  CHECK(negate(Field(8)).norm2() == 0);
  CHECK(negate(x).norm2() == x.norm2());
}

TEST_CASE("radial spectrum") {
  std::vector<Field> specs;
  for (unsigned s = 0; s < 1000; ++s) specs.push_back(dft2(white_noise(32, 1.0, 100 + s)));
  RadialSpectrum r = radial_power_spectrum(specs);
  for (std::size_t b = 1; b < r.log_power.size(); ++b) {
    if (r.count[b] < 8) continue;
    CHECK(std::abs(std::pow(10.0, r.log_power[b]) - 1.0) < 0.05);
  }

  Field cosine(32);
  for (int u1 = 0; u1 < 32; ++u1)
    for (int u2 = 0; u2 < 32; ++u2) cosine(u1, u2) = std::cos(2 * oracle::pi * 5 * u1 / 32);
  RadialSpectrum c = radial_power_spectrum({dft2(cosine)});
  std::size_t best = 0;
  for (std::size_t b = 0; b < c.log_power.size(); ++b)
    if (c.log_power[b] > c.log_power[best]) best = b;
  CHECK(best == 5);

  Field scaled = specs[0];
  for (auto& v : scaled.data) v *= 3.0;
  RadialSpectrum a = radial_power_spectrum({specs[0]}), b = radial_power_spectrum({scaled});
  for (std::size_t i = 0; i < a.log_power.size(); ++i)
    CHECK(b.log_power[i] - a.log_power[i] == doctest::Approx(2 * std::log10(3.0)));
  CHECK_THROWS(radial_power_spectrum({}));
}
