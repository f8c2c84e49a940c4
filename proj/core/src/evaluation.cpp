#include "wph/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "fft.hpp"
#include "wph/error.hpp"
#include "wph/harmonics.hpp"

namespace wph {

EvalWindow make_eval_window(int J, int Q, const EvalWindowSpec& spec) {
  if (spec.k_min > spec.k_max) throw ConfigError("evaluation window: empty k range");
  if (spec.dn < 0) throw ConfigError("evaluation window: negative dn");
  EvalWindow w;
  w.J = J;
  w.Q = Q;
  w.dn = spec.dn;
  for (int c = 0; c < J * Q; ++c)
    for (int k = spec.k_min; k <= spec.k_max; ++k) w.classes.push_back({c, k});
  if (spec.lowpass)
    for (int k = std::max(spec.k_min, 0); k <= std::min(spec.k_max, 1); ++k)
      w.classes.push_back({J * Q, k});
  for (const auto& v : w.classes)
    for (int n1 = -spec.dn; n1 <= spec.dn; ++n1)
      for (int n2 = -spec.dn; n2 <= spec.dn; ++n2) w.vertices.push_back({v, n1, n2});
  return w;
}

WindowMatrix estimate_window(const std::vector<Field>& xs, const WaveletBank& bank,
                             const EvalWindow& window) {
  if (xs.empty()) throw ConfigError("estimate_window: no realizations");
  if (window.J != bank.J || window.Q != bank.Q) throw ConfigError("window does not match the bank");
  const int n = bank.side;
  const std::size_t d = static_cast<std::size_t>(n) * n;
  const std::size_t nc = window.classes.size();
  const int np = (2 * window.dn + 1) * (2 * window.dn + 1);
  for (const auto& v : window.classes)
    if (2 * window.dn * bank.stride(v.channel) >= n)
      throw ConfigError("evaluation window wider than the grid");

  WindowMatrix K;
  K.n = window.size();
  K.data.assign(K.n * K.n, cplx{});
  K.realizations = static_cast<int>(xs.size());
  std::vector<cplx> mu(nc);
  std::vector<std::vector<cplx>> G(nc);
  std::vector<cplx> buf(d);

  for (const auto& x : xs) {
    if (x.side != n) throw ConfigError("estimate_window: side mismatch");
    Field xh = dft2(x);
    std::map<int, std::vector<cplx>> conv;
    for (std::size_t i = 0; i < nc; ++i) {
      const auto& v = window.classes[i];
      auto it = conv.find(v.channel);
      if (it == conv.end()) it = conv.emplace(v.channel, convolve_full(xh, bank, v.channel)).first;
      G[i].resize(d);
      cplx s = 0;
      for (std::size_t p = 0; p < d; ++p) {
        G[i][p] = phase_harmonic(it->second[p], v.k);
        s += G[i][p];
      }
      mu[i] += s / static_cast<double>(d);
      detail::fft2_inplace(G[i].data(), n, -1);
    }
    // R(delta) = (1/d) sum_u A(u) conj(B(u + delta)) = (1/d^2) sum_w A^ conj(B^) e^{-i w delta}.
    const double scale = 1.0 / (static_cast<double>(d) * d);
    for (std::size_t a = 0; a < nc; ++a)
      for (std::size_t b = a; b < nc; ++b) {
        for (std::size_t p = 0; p < d; ++p) buf[p] = G[a][p] * std::conj(G[b][p]);
        detail::fft2_inplace(buf.data(), n, -1);
        const int sa = bank.stride(window.classes[a].channel);
        const int sb = bank.stride(window.classes[b].channel);
        for (int ia = 0; ia < np; ++ia) {
          const auto& va = window.vertices[a * np + ia];
          for (int ib = 0; ib < np; ++ib) {
            const auto& vb = window.vertices[b * np + ib];
            int d1 = wrap(sb * vb.n1 - sa * va.n1, n);
            int d2 = wrap(sb * vb.n2 - sa * va.n2, n);
            cplx r = buf[static_cast<std::size_t>(d1) * n + d2] * scale;
            K(a * np + ia, b * np + ib) += r;
          }
        }
      }
  }
  const double inv = 1.0 / static_cast<double>(xs.size());
  for (auto& m : mu) m *= inv;
  for (std::size_t a = 0; a < nc; ++a)
    for (std::size_t b = a; b < nc; ++b)
      for (int ia = 0; ia < np; ++ia)
        for (int ib = (a == b ? ia : 0); ib < np; ++ib) {
          const std::size_t r = a * np + ia, c = b * np + ib;
          cplx v = K(r, c) * inv - mu[a] * std::conj(mu[b]);
          K(r, c) = v;
          K(c, r) = std::conj(v);
        }
  for (std::size_t r = 0; r < K.n; ++r) K(r, r) = K(r, r).real();
  K.diag.resize(nc);
  for (std::size_t a = 0; a < nc; ++a) K.diag[a] = K(a * np, a * np).real();
  return K;
}

WindowMatrix normalize_window(const WindowMatrix& K, const EvalWindow& window,
                              const std::vector<double>& diag) {
  const std::size_t nc = window.classes.size();
  if (diag.size() != nc) throw ConfigError("normalize_window: diagonal size mismatch");
  for (std::size_t a = 0; a < nc; ++a)
    if (!(diag[a] > 0)) throw NumericalError("normalize_window: degenerate class " + std::to_string(a));
  const std::size_t np = K.n / nc;
  WindowMatrix C = K;
  for (std::size_t r = 0; r < K.n; ++r)
    for (std::size_t c = 0; c < K.n; ++c) C(r, c) = K(r, c) / std::sqrt(diag[r / np] * diag[c / np]);
  C.normalized = true;
  C.diag = diag;
  return C;
}

double operator_norm(const WindowMatrix& M, double tol, int max_iter, std::uint64_t seed) {
  const std::size_t n = M.n;
  std::vector<cplx> v(n), w(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = cplx(normal_at(seed, 2 * i), normal_at(seed, 2 * i + 1));
  auto normalize = [](std::vector<cplx>& a) {
    double s = 0;
    for (const auto& x : a) s += std::norm(x);
    s = std::sqrt(s);
    if (s > 0)
      for (auto& x : a) x /= s;
    return s;
  };
  normalize(v);
  double prev = -1;
  for (int it = 0; it < max_iter; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      cplx s = 0;
      const cplx* row = M.data.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) s += row[j] * v[j];
      w[i] = s;
    }
    double lam = normalize(w);
    if (lam == 0) return 0.0;
    v.swap(w);
    if (prev >= 0 && std::abs(lam - prev) <= 1e-2 * tol * lam) return lam;
    prev = lam;
  }
  throw NumericalError("operator_norm: power iteration did not converge");
}

double correlation_error(const WindowMatrix& C_ref, const WindowMatrix& C_test, double tol) {
  if (C_ref.n != C_test.n) throw ConfigError("correlation_error: window size mismatch");
  if (C_ref.diag != C_test.diag)
    throw ConfigError("correlation_error: tables must share the reference normalization");
  WindowMatrix D = C_ref;
  for (std::size_t i = 0; i < D.data.size(); ++i) D.data[i] = C_ref.data[i] - C_test.data[i];
  double nr = operator_norm(C_ref, tol);
  if (nr == 0) throw NumericalError("correlation_error: zero reference");
  return operator_norm(D, tol) / nr;
}

std::vector<ProfilePoint> long_range_profile(const std::vector<Field>& xs, const WaveletBank& bank,
                                             int k, int j, int a_max) {
  if (xs.empty()) throw ConfigError("long_range_profile: no fields");
  if (j < 1 || j > bank.J) throw ConfigError("long_range_profile: scale out of range");
  const int n = bank.side;
  if (static_cast<long>(a_max) * (1L << j) > n / 2)
    throw ConfigError("long_range_profile: distance beyond half the grid");
  const std::size_t d = static_cast<std::size_t>(n) * n;
  std::vector<ProfilePoint> out;
  for (int a = 0; a <= a_max; ++a) out.push_back({k, j, a, 0.0});
  for (int l = 0; l < bank.Q; ++l) {
    const int c = bank.channel(j, l);
    std::vector<cplx> acc(d);
    cplx mu = 0;
    for (const auto& x : xs) {
      auto z = convolve_full(dft2(x), bank, c);
      cplx s = 0;
      for (auto& v : z) {
        v = phase_harmonic(v, k);
        s += v;
      }
      mu += s / static_cast<double>(d);
      detail::fft2_inplace(z.data(), n, -1);
      for (auto& v : z) v = std::norm(v);
      detail::fft2_inplace(z.data(), n, -1);
      for (std::size_t p = 0; p < d; ++p) acc[p] += z[p];
    }
    mu /= static_cast<double>(xs.size());
    const double scale = 1.0 / (static_cast<double>(d) * d * xs.size());
    std::vector<double> R(d);
    for (std::size_t p = 0; p < d; ++p) R[p] = std::abs(acc[p] * scale - std::norm(mu));
    // R holds |K(delta)| up to the sign convention of delta, which the annulus ignores.
    const double r0 = (acc[0] * scale - std::norm(mu)).real();
    if (!(r0 > 0)) throw NumericalError("long_range_profile: degenerate channel");
    for (int a = 0; a <= a_max; ++a) {
      const double target = static_cast<double>(1 << j) * a;
      double best = 0;
      for (int m1 = 0; m1 < n; ++m1)
        for (int m2 = 0; m2 < n; ++m2) {
          double r = std::hypot(signed_bin(m1, n), signed_bin(m2, n));
          if (std::abs(r - target) >= 0.5) continue;
          best = std::max(best, R[static_cast<std::size_t>(m1) * n + m2] / r0);
        }
      out[a].value = std::max(out[a].value, best);
    }
  }
  return out;
}

std::vector<std::pair<int, int>> structure_offsets(int j) {
  if (j < 1) throw ConfigError("structure function: j must be >= 1");
  const double target = static_cast<double>(1 << (j - 1));
  const int r = (1 << (j - 1)) + 1;
  std::vector<std::pair<int, int>> out;
  for (int t1 = 0; t1 <= r; ++t1)
    for (int t2 = -r; t2 <= r; ++t2) {
      if (t1 == 0 && t2 <= 0) continue;
      if (std::abs(std::hypot(t1, t2) - target) < 0.5) out.push_back({t1, t2});
    }
  return out;
}

std::vector<double> structure_function_per_offset(const Field& x, int j, double q) {
  if (q < 1) throw ConfigError("structure function: q must be >= 1");
  const int n = x.side;
  if ((1 << (j - 1)) >= n / 2) throw ConfigError("structure function: lag beyond half the grid");
  std::vector<double> out;
  for (auto [t1, t2] : structure_offsets(j)) {
    double s = 0;
    for (int u1 = 0; u1 < n; ++u1)
      for (int u2 = 0; u2 < n; ++u2)
        s += std::pow(std::abs(x(u1, u2) - x(wrap(u1 - t1, n), wrap(u2 - t2, n))), q);
    out.push_back(s / (static_cast<double>(n) * n));
  }
  return out;
}

double structure_function(const Field& x, int j, double q) {
  auto v = structure_function_per_offset(x, j, q);
  return *std::max_element(v.begin(), v.end());
}

ErrorReport summarize(const std::string& metric, int j, double q, std::vector<double> runs) {
  ErrorReport r;
  r.metric = metric;
  r.j = j;
  r.q = q;
  r.runs = std::move(runs);
  if (r.runs.empty()) return r;
  double s = 0;
  for (double v : r.runs) s += v;
  r.mean = s / r.runs.size();
  double v2 = 0;
  for (double v : r.runs) v2 += (v - r.mean) * (v - r.mean);
  r.std = r.runs.size() > 1 ? std::sqrt(v2 / (r.runs.size() - 1)) : 0.0;
  return r;
}

ErrorReport structure_error(const std::vector<Field>& reference, const std::vector<Field>& model,
                            int j, double q) {
  if (reference.empty() || model.empty()) throw ConfigError("structure_error: empty ensemble");
  std::vector<double> runs;
  const std::size_t n = reference.size() == 1 ? model.size() : std::min(reference.size(), model.size());
  for (std::size_t i = 0; i < n; ++i) {
    const Field& r = reference.size() == 1 ? reference[0] : reference[i];
    double sr = structure_function(r, j, q);
    if (sr == 0) throw NumericalError("structure_error: zero reference structure function");
    runs.push_back(std::abs(sr - structure_function(model[i], j, q)) / std::abs(sr));
  }
  return summarize("structure", j, q, std::move(runs));
}

}  // namespace wph
