#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace wph {

using cplx = std::complex<double>;

enum class Domain { space, frequency };

// Periodic side x side grid stored row-major: index u1 * side + u2.
// In the frequency domain, bin m (0 <= m < side) stands for omega = 2 pi m' / side
// with m' the representative of m in [-side/2, side/2).
struct Field {
  int side = 0;
  Domain domain = Domain::space;
  std::vector<cplx> data;

  Field() = default;
  explicit Field(int side, Domain domain = Domain::space);

  std::size_t size() const { return data.size(); }
  cplx& operator()(int u1, int u2) { return data[static_cast<std::size_t>(u1) * side + u2]; }
  const cplx& operator()(int u1, int u2) const {
    return data[static_cast<std::size_t>(u1) * side + u2];
  }
  cplx& operator[](std::size_t i) { return data[i]; }
  const cplx& operator[](std::size_t i) const { return data[i]; }

  double norm2() const;
  double max_imag() const;
};

bool is_pow2(long n);
int log2_exact(long n);

// Signed frequency index in [-n/2, n/2).
inline int signed_bin(int m, int n) { return m >= n / 2 ? m - n : m; }
inline int wrap(int m, int n) {
  m %= n;
  return m < 0 ? m + n : m;
}

// Unnormalized forward transform, inverse carries 1/d.
Field dft2(const Field& x);
Field idft2(const Field& xhat);

// Counter-based generator: sample i of stream `seed` only depends on (seed, i).
std::uint64_t splitmix64(std::uint64_t z);
double uniform_at(std::uint64_t seed, std::uint64_t i);
double normal_at(std::uint64_t seed, std::uint64_t i);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

Field white_noise(int side, double sigma, std::uint64_t seed);
Field translate(const Field& x, int tau1, int tau2);
Field negate(const Field& x);

struct RadialSpectrum {
  std::vector<double> radius;  // bin centre in grid steps
  std::vector<double> log_power;
  std::vector<long> count;
};

// Bin b collects |m| in [b - 1/2, b + 1/2) with m the signed integer frequency.
RadialSpectrum radial_power_spectrum(const std::vector<Field>& spectra);

}  // namespace wph
