#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>
#include <vector>

namespace wph::detail {
namespace {

std::mutex plan_mutex;

fftw_plan plan_for(int n, int sign) {
  static std::map<std::pair<int, int>, fftw_plan> plans;
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto key = std::make_pair(n, sign);
  auto it = plans.find(key);
  if (it != plans.end()) return it->second;
  std::vector<std::complex<double>> tmp(static_cast<std::size_t>(n) * n);
  auto* buf = reinterpret_cast<fftw_complex*>(tmp.data());
  fftw_plan p = fftw_plan_dft_2d(n, n, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  plans.emplace(key, p);
  return p;
}

}  // namespace

void fft2_inplace(std::complex<double>* data, int n, int sign) {
  if (n == 1) return;
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plan_for(n, sign), buf, buf);
}

}  // namespace wph::detail
