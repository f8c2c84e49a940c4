#include <map>

#include "doctest.h"
#include "oracles.hpp"
#include "wph/covariance.hpp"
#include "wph/error.hpp"
#include "wph/fourier_stats.hpp"
#include "wph/harmonics.hpp"

using namespace wph;

namespace {

// Literal orbit sum: every group element is applied to the image itself, coefficients come
// from direct spatial convolution, and translations run over the lattice of each statistic.
struct OrbitOracle {
  const WaveletBank& bank;
  std::vector<std::vector<std::vector<cplx>>> images;  // [g][channel][pixel]

  OrbitOracle(const Field& x, const WaveletBank& b, const SymmetryGroup& g) : bank(b) {
    const int n = x.side;
    std::vector<std::vector<cplx>> kernels;
    for (int c = 0; c < b.channels(); ++c) kernels.push_back(oracle::kernel_of(b.filters[c], n));
    for (int s : {1, -1}) {
      if (s < 0 && !g.sign_change) continue;
      for (int f = 0; f < (g.reflection ? 2 : 1); ++f)
        for (int q = 0; q < (g.rotations ? 4 : 1); ++q) {
          Field y(n);
          for (int u1 = 0; u1 < n; ++u1)
            for (int u2 = 0; u2 < n; ++u2) {
              int a1 = u1, a2 = u2;
              for (int r = 0; r < q; ++r) {  // quarter turn: y(u1, u2) = x(u2, -u1)
                int t = a1;
                a1 = a2;
                a2 = wrap(-t, n);
              }
              if (f) a2 = wrap(-a2, n);
              y(u1, u2) = double(s) * x(a1, a2);
            }
          std::vector<std::vector<cplx>> ch;
          for (int c = 0; c < b.channels(); ++c) {
            std::vector<cplx> out(x.size());
            for (int u1 = 0; u1 < n; ++u1)
              for (int u2 = 0; u2 < n; ++u2) out[u1 * n + u2] = oracle::conv_at(y, kernels[c], u1, u2);
            ch.push_back(std::move(out));
          }
          images.push_back(std::move(ch));
        }
    }
  }

  cplx F(std::size_t g, const VertexClass& v, int u1, int u2) const {
    const int n = bank.side;
    return oracle::polar_harmonic(images[g][v.channel][wrap(u1, n) * n + wrap(u2, n)], v.k);
  }

  cplx mean(const VertexClass& v) const {
    const int s = bank.stride(v.channel), L = bank.lattice(v.channel);
    cplx acc = 0;
    for (std::size_t g = 0; g < images.size(); ++g)
      for (int n1 = 0; n1 < L; ++n1)
        for (int n2 = 0; n2 < L; ++n2) acc += F(g, v, s * n1, s * n2);
    return acc / double(images.size() * L * L);
  }

  cplx cov(const Edge& e) const {
    const int S = std::max(bank.stride(e.a.channel), bank.stride(e.b.channel));
    const int L = bank.side / S;
    cplx acc = 0;
    for (std::size_t g = 0; g < images.size(); ++g)
      for (int n1 = 0; n1 < L; ++n1)
        for (int n2 = 0; n2 < L; ++n2)
          acc += F(g, e.a, S * n1, S * n2) * std::conj(F(g, e.b, S * (n1 + e.tau.n1), S * (n2 + e.tau.n2)));
    return acc / double(images.size() * L * L) - mean(e.a) * std::conj(mean(e.b));
  }
};

ModelSpec small_spec(int dn, bool rotations) {
  ModelSpec s;
  s.J = 2;
  s.Q = 4;
  s.k_min = 0;
  s.k_max = 2;
  s.dn = dn;
  s.dj = 1;
  s.dl = 1;
  s.group.Q = 4;
  s.group.rotations = rotations;
  return s;
}

double max_abs_diff(const CovarianceTable& a, const CovarianceTable& b) {
  double e = 0;
  for (std::size_t i = 0; i < a.cov.size(); ++i) e = std::max(e, std::abs(a.cov[i] - b.cov[i]));
  for (std::size_t i = 0; i < a.mean.size(); ++i) e = std::max(e, std::abs(a.mean[i] - b.mean[i]));
  return e;
}

}  // namespace

TEST_CASE("means") {
  WaveletBank b = build_bump_bank(32, 3, 4);
  Field x = oracle::random_field(32, 50);
  std::vector<VertexClass> cls;
  for (int c = 0; c < b.channels(); ++c) cls.push_back({c, 1});
  for (int c = 0; c < b.lowpass(); ++c) cls.push_back({c, 0});
  SymmetryGroup none;
  auto m = estimate_mean(x, b, cls, none);
  auto w = wavelet_transform(x, b);
  for (std::size_t i = 0; i < cls.size(); ++i) {
    const auto& v = cls[i];
    if (v.k == 1 && !b.is_lowpass(v.channel)) CHECK(std::abs(m[i]) < 1e-12);
    if (v.k == 0) {
      double s = 0;
      for (const auto& z : w.values[v.channel]) s += std::hypot(z.real(), z.imag());
      CHECK(m[i].real() == doctest::Approx(s / w.values[v.channel].size()).epsilon(1e-12));
    }
  }
  Field c(32);
  for (auto& v : c.data) v = 0.75;
  auto mc = estimate_mean(c, b, {{b.lowpass(), 1}}, none);
  CHECK(std::abs(mc[0] - cplx(8 * 0.75)) < 1e-10);
}

TEST_CASE("estimates match the literal orbit sum") {
  const int n = 8;
  WaveletBank b = build_bump_bank(n, 2, 4);
  Field x = oracle::random_field(n, 60);
  struct Case {
    int dn;
    SymmetryGroup g;
  };
  for (const Case& cs : {Case{1, {false, false, false, 4}}, Case{1, {false, true, true, 4}},
                         Case{0, {true, true, true, 4}}, Case{0, {true, false, false, 4}}}) {
    ModelSpec s = small_spec(cs.dn, cs.g.rotations);
    s.group = cs.g;
    EdgeSet es = build_foveal_edges(s);
    CovarianceTable t = estimate_covariance(x, b, es, cs.g);
    OrbitOracle o(x, b, cs.g);
    double err = 0;
    for (std::size_t i = 0; i < t.edges.size(); ++i) err = std::max(err, std::abs(t.cov[i] - o.cov(t.edges[i])));
    for (std::size_t i = 0; i < t.classes.size(); ++i) err = std::max(err, std::abs(t.mean[i] - o.mean(t.classes[i])));
    CHECK(err < 1e-12);
  }
}

TEST_CASE("table structure") {
  WaveletBank b = build_bump_bank(32, 3, 8);
  ModelSpec s = model_preset("C", 3, 8);
  EdgeSet es = build_foveal_edges(s);
  Field x = oracle::random_field(32, 70);
  CovarianceTable t = estimate_covariance(x, b, es, s.group);
  for (std::size_t i = 0; i < t.edges.size(); ++i) {
    const Edge& e = t.edges[i];
    if (e.a == e.b && e.tau == Offset{}) {
      CHECK(t.cov[i].imag() == 0.0);
      CHECK(t.cov[i].real() >= 0.0);
    }
    int p = t.edge_index(hermitian_partner(e));
    REQUIRE(p >= 0);
    CHECK(std::abs(t.cov[p] - std::conj(t.cov[i])) < 1e-12 * (1 + std::abs(t.cov[i])));
  }
  CHECK_THROWS_AS(estimate_covariance(x, b, EdgeSet{}, s.group), ConfigError);
}

TEST_CASE("orbit invariance per generator") {
  const int n = 32;
  WaveletBank b = build_bump_bank(n, 3, 8);
  Field x = oracle::random_field(n, 80);
  ModelSpec s = model_preset("B", 3, 8);
  s.group = {false, true, true, 8};
  EdgeSet es = build_foveal_edges(s);
  CovarianceTable t = estimate_covariance(x, b, es, s.group);
  CHECK(max_abs_diff(t, estimate_covariance(translate(x, 4, 12), b, es, s.group)) < 1e-12);
  CHECK(max_abs_diff(t, estimate_covariance(negate(x), b, es, s.group)) < 1e-12);
  Field r(n);
  for (int u1 = 0; u1 < n; ++u1)
    for (int u2 = 0; u2 < n; ++u2) r(u1, u2) = x(u1, wrap(-u2, n));
  CHECK(max_abs_diff(t, estimate_covariance(r, b, es, s.group)) < 1e-12);

  ModelSpec d = model_preset("D", 3, 8);
  d.group = {true, true, false, 8};
  EdgeSet ed = build_foveal_edges(d);
  CovarianceTable td = estimate_covariance(x, b, ed, d.group);
  Field q(n);
  for (int u1 = 0; u1 < n; ++u1)
    for (int u2 = 0; u2 < n; ++u2) q(u1, u2) = x(u2, wrap(-u1, n));
  CHECK(max_abs_diff(td, estimate_covariance(q, b, ed, d.group)) < 1e-12);
}

TEST_CASE("sign change kills odd harmonic pairs") {
  const int n = 32;
  WaveletBank b = build_bump_bank(n, 3, 8);
  Field x = oracle::random_field(n, 90);
  for (int k = 0; k < x.size(); ++k) x[k] = std::pow(x[k].real(), 3);
  ModelSpec s = model_preset("C", 3, 8);
  EdgeSet es = build_foveal_edges(s);
  SymmetryGroup g{false, false, true, 8};
  CovarianceTable t = estimate_covariance(x, b, es, g);
  CovarianceTable raw = estimate_covariance(x, b, es, SymmetryGroup{});
  double odd = 0, odd_raw = 0;
  for (std::size_t i = 0; i < t.edges.size(); ++i)
    if ((t.edges[i].a.k + t.edges[i].b.k) % 2) {
      odd = std::max(odd, std::abs(t.cov[i]));
      odd_raw = std::max(odd_raw, std::abs(raw.cov[i]));
    }
  CHECK(odd < 1e-12);
  CHECK(odd_raw > 1e-6);
}

TEST_CASE("central reflection makes the table real") {
  WaveletBank b = build_bump_bank(32, 3, 8);
  Field x = oracle::random_field(32, 91);
  ModelSpec d = model_preset("D", 3, 8);
  EdgeSet es = build_foveal_edges(d);
  CovarianceTable t = estimate_covariance(x, b, es, d.group);
  for (const auto& v : t.cov) CHECK(std::abs(v.imag()) < 1e-12 * (1 + std::abs(v)));
  for (const auto& v : t.mean) CHECK(std::abs(v.imag()) < 1e-12 * (1 + std::abs(v)));
}

TEST_CASE("normalization") {
  WaveletBank b = build_bump_bank(32, 3, 8);
  ModelSpec s = model_preset("B", 3, 8);
  EdgeSet es = build_foveal_edges(s);
  for (unsigned seed = 0; seed < 5; ++seed) {
    Field x = oracle::random_field(32, 100 + seed);
    CovarianceTable t = estimate_covariance(x, b, es, s.group);
    CovarianceTable c = normalize_correlations(t, t.own_diagonal());
    for (std::size_t i = 0; i < c.edges.size(); ++i) {
      const Edge& e = c.edges[i];
      if (e.a == e.b && e.tau == Offset{}) CHECK(c.cov[i].real() == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(std::abs(c.cov[i]) <= 1 + 1e-10);
    }
    Field y = x;
    for (auto& v : y.data) v *= 2.0;
    CovarianceTable t2 = estimate_covariance(y, b, es, s.group);
    CovarianceTable c2 = normalize_correlations(t2, t2.own_diagonal());
    for (std::size_t i = 0; i < c.cov.size(); ++i) CHECK(std::abs(c.cov[i] - c2.cov[i]) < 1e-12);
  }
  Field zero(32);
  CovarianceTable tz = estimate_covariance(zero, b, es, s.group);
  CHECK_THROWS_AS(normalize_correlations(tz, tz.own_diagonal()), NumericalError);
}

TEST_CASE("angular reduction") {
  const int J = 3, Q = 8;
  WaveletBank b = build_bump_bank(32, J, Q);
  Field x = oracle::random_field(32, 110);
  ModelSpec d = model_preset("D", J, Q);
  d.dl = Q / 2;
  d.group.reflection = true;
  EdgeSet es = build_foveal_edges(d);
  CovarianceTable t = estimate_covariance(x, b, es, d.group);
  ReducedTable r = angular_fourier_reduce(normalize_correlations(t, t.own_diagonal()));
  CHECK(r.offdiag_energy < 1e-10 * r.total_energy);
  CHECK(r.unreduced_size == Q * r.entries.size());
  for (const auto& e : r.entries) CHECK(e.value.imag() == 0.0);

  CovarianceTable nr = estimate_covariance(x, b, es, SymmetryGroup{});
  CHECK_THROWS_AS(angular_fourier_reduce(nr), ConfigError);

  CovarianceTable one;
  one.J = 1;
  one.Q = 1;
  one.classes = {{0, 1}, {1, 1}};
  one.edges = {{{0, 1}, {0, 1}, {0, 0}}};
  one.cov = {cplx(2.5, 0)};
  ReducedTable ro = angular_fourier_reduce(one);
  REQUIRE(ro.entries.size() == 1u);
  CHECK(ro.entries[0].value == cplx(2.5, 0));
}

TEST_CASE("harmonic spectra concentrate at k lambda") {
  const int n = 64;
  WaveletBank b = build_bump_bank(n, 3, 8);
  const int c = b.channel(2, 1);
  auto lam = b.center(c);
  const double pi = oracle::pi;
  for (int k : {0, 1, 2}) {
    std::vector<double> power(n * n, 0.0);
    for (unsigned s = 0; s < 20; ++s) {
      Field x = white_noise(n, 1.0, 200 + s);
      auto z = convolve_full(dft2(x), b, c);
      Field f(n);
      cplx m = 0;
      for (std::size_t i = 0; i < z.size(); ++i) m += (f[i] = phase_harmonic(z[i], k));
      m /= double(z.size());
      for (auto& v : f.data) v -= m;
      Field fh = dft2(f);
      for (std::size_t i = 0; i < fh.size(); ++i) power[i] += std::norm(fh[i]);
    }
    // Share of the power inside the ball of radius C max(k, 1) |lambda| around k lambda.
    const double r = support_constant(b) * std::max(k, 1) * std::hypot(lam[0], lam[1]);
    double in = 0, total = 0;
    for (int m1 = 0; m1 < n; ++m1)
      for (int m2 = 0; m2 < n; ++m2) {
        double d1 = std::remainder(2 * pi * m1 / n - k * lam[0], 2 * pi);
        double d2 = std::remainder(2 * pi * m2 / n - k * lam[1], 2 * pi);
        total += power[m1 * n + m2];
        if (std::hypot(d1, d2) <= r) in += power[m1 * n + m2];
      }
    INFO("k=" << k << " share " << in / total);
    CHECK(in / total > 0.85);
  }
}

TEST_CASE("support constant and spectral overlap") {
  WaveletBank b = build_bump_bank(64, 3, 8);
  double C = support_constant(b);
  CHECK(C > 0);
  CHECK(C < 1.5);
  CHECK(spectral_overlap(b, b.channel(1, 0), 1, b.channel(1, 0), 1, C));
  CHECK(!spectral_overlap(b, b.channel(1, 0), 1, b.channel(1, 4), 1, 0.1));
  CHECK(spectral_overlap(b, b.channel(2, 0), 2, b.channel(1, 0), 1, C));
}
