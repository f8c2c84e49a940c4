#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wph/graph.hpp"
#include "wph/grid.hpp"
#include "wph/wavelet.hpp"

namespace wph {

struct EvalWindowSpec {
  int k_min = 0;
  int k_max = 4;
  int dn = 2;
  bool lowpass = true;
};

struct WindowVertex {
  VertexClass v;
  int n1 = 0;
  int n2 = 0;
};

// Vertex subset V0: every class (all channels, k_min..k_max; the lowpass with k in {0, 1})
// at positions u = 2^{j-1} n, |n|_inf <= dn. Scale and angle ranges are unrestricted.
struct EvalWindow {
  int J = 0;
  int Q = 0;
  int dn = 0;
  std::vector<VertexClass> classes;
  std::vector<WindowVertex> vertices;  // class-major, then positions
  std::size_t size() const { return vertices.size(); }
};

EvalWindow make_eval_window(int J, int Q, const EvalWindowSpec& spec = {});

// Dense Hermitian matrix over V0 x V0 plus the per-class diagonal used to normalize it.
struct WindowMatrix {
  std::size_t n = 0;
  std::vector<cplx> data;     // row-major
  std::vector<double> diag;   // per window class, K(v, v) at zero offset
  bool normalized = false;
  int realizations = 0;

  cplx& operator()(std::size_t i, std::size_t j) { return data[i * n + j]; }
  cplx operator()(std::size_t i, std::size_t j) const { return data[i * n + j]; }
};

// Covariances on V0^2 from full-resolution coefficient fields, averaged over all pixel
// translations and over the realizations.
WindowMatrix estimate_window(const std::vector<Field>& xs, const WaveletBank& bank,
                             const EvalWindow& window);

// C = K / sqrt(D(v) D(v')) with D given per window class.
WindowMatrix normalize_window(const WindowMatrix& K, const EvalWindow& window,
                              const std::vector<double>& diag);

// Largest eigenvalue magnitude of a Hermitian matrix by power iteration.
double operator_norm(const WindowMatrix& M, double tol = 1e-6, int max_iter = 10000,
                     std::uint64_t seed = 11);

double correlation_error(const WindowMatrix& C_ref, const WindowMatrix& C_test, double tol = 1e-6);

struct ProfilePoint {
  int k, j, a;
  double value;
};

// max over angles and offsets with ||delta| - 2^j a| < 1/2 of |C(v, v, delta)|, normalized by
// the own diagonal.
std::vector<ProfilePoint> long_range_profile(const std::vector<Field>& xs, const WaveletBank& bank,
                                             int k, int j, int a_max);

// Offsets tau with ||tau| - 2^{j-1}| < 1/2 (one of each +-tau pair).
std::vector<std::pair<int, int>> structure_offsets(int j);
std::vector<double> structure_function_per_offset(const Field& x, int j, double q);
double structure_function(const Field& x, int j, double q);

struct ErrorReport {
  std::string metric;
  int j = 0;
  double q = 0;
  double mean = 0;
  double std = 0;
  std::vector<double> runs;
};

ErrorReport summarize(const std::string& metric, int j, double q, std::vector<double> runs);

// Relative structure-function error per realization pair; a single reference is compared
// with every model sample.
ErrorReport structure_error(const std::vector<Field>& reference, const std::vector<Field>& model,
                            int j, double q);

}  // namespace wph
