#include "wph/grid.hpp"

#include <cmath>
#include <numbers>

#include "fft.hpp"
#include "wph/error.hpp"

namespace wph {

Field::Field(int side_, Domain domain_)
    : side(side_), domain(domain_), data(static_cast<std::size_t>(side_) * side_) {}

double Field::norm2() const {
  double s = 0;
  for (const auto& v : data) s += std::norm(v);
  return s;
}

double Field::max_imag() const {
  double m = 0;
  for (const auto& v : data) m = std::max(m, std::abs(v.imag()));
  return m;
}

bool is_pow2(long n) { return n > 0 && (n & (n - 1)) == 0; }

int log2_exact(long n) {
  if (!is_pow2(n)) throw ConfigError("not a power of two: " + std::to_string(n));
  int l = 0;
  while ((1L << l) < n) ++l;
  return l;
}

static void check_side(int side) {
  if (side < 2 || !is_pow2(side))
    throw ConfigError("grid side must be a power of two >= 2, got " + std::to_string(side));
}

Field dft2(const Field& x) {
  check_side(x.side);
  if (x.domain != Domain::space) throw ConfigError("dft2 expects a space-domain field");
  Field out = x;
  out.domain = Domain::frequency;
  detail::fft2_inplace(out.data.data(), out.side, -1);
  return out;
}

Field idft2(const Field& xhat) {
  check_side(xhat.side);
  if (xhat.domain != Domain::frequency) throw ConfigError("idft2 expects a frequency-domain field");
  Field out = xhat;
  out.domain = Domain::space;
  detail::fft2_inplace(out.data.data(), out.side, +1);
  const double inv = 1.0 / static_cast<double>(out.size());
  for (auto& v : out.data) v *= inv;
  return out;
}

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

double uniform_at(std::uint64_t seed, std::uint64_t i) {
  std::uint64_t r = splitmix64(splitmix64(seed) + i * 0xD1B54A32D192ED03ULL);
  // (0, 1]
  return (static_cast<double>(r >> 11) + 1.0) * 0x1.0p-53;
}

double normal_at(std::uint64_t seed, std::uint64_t i) {
  // Box-Muller on the pair (2p, 2p+1); even i takes the cosine branch.
  std::uint64_t p = i / 2;
  double u1 = uniform_at(seed, 2 * p);
  double u2 = uniform_at(seed, 2 * p + 1);
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * std::numbers::pi * u2;
  return (i % 2 == 0) ? r * std::cos(a) : r * std::sin(a);
}

Field white_noise(int side, double sigma, std::uint64_t seed) {
  check_side(side);
  if (!(sigma >= 0)) throw ConfigError("white_noise: sigma must be nonnegative");
  Field x(side);
  if (sigma == 0) return x;
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = sigma * normal_at(seed, i);
  return x;
}

Field translate(const Field& x, int tau1, int tau2) {
  Field out(x.side, x.domain);
  const int n = x.side;
  for (int u1 = 0; u1 < n; ++u1) {
    int s1 = wrap(u1 - tau1, n);
    for (int u2 = 0; u2 < n; ++u2) out(u1, u2) = x(s1, wrap(u2 - tau2, n));
  }
  return out;
}

Field negate(const Field& x) {
  Field out = x;
  for (auto& v : out.data) v = -v;
  return out;
}

RadialSpectrum radial_power_spectrum(const std::vector<Field>& spectra) {
  if (spectra.empty()) throw ConfigError("radial_power_spectrum: empty list");
  const int n = spectra.front().side;
  const double d = static_cast<double>(n) * n;
  int nbins = static_cast<int>(std::floor(std::sqrt(2.0) * (n / 2) + 0.5)) + 1;
  std::vector<double> acc(nbins, 0.0);
  std::vector<long> cnt(nbins, 0);
  for (const auto& s : spectra) {
    if (s.side != n) throw ConfigError("radial_power_spectrum: sides differ");
    for (int m1 = 0; m1 < n; ++m1) {
      int a = signed_bin(m1, n);
      for (int m2 = 0; m2 < n; ++m2) {
        int b = signed_bin(m2, n);
        int bin = static_cast<int>(std::floor(std::sqrt(double(a) * a + double(b) * b) + 0.5));
        acc[bin] += std::norm(s(m1, m2)) / d;
        cnt[bin] += 1;
      }
    }
  }
  RadialSpectrum out;
  for (int b = 0; b < nbins; ++b) {
    if (cnt[b] == 0) continue;
    out.radius.push_back(b);
    out.log_power.push_back(std::log10(acc[b] / cnt[b]));
    out.count.push_back(cnt[b] / static_cast<long>(spectra.size()));
  }
  return out;
}

}  // namespace wph
