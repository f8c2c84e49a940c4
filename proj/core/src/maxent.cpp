#include "wph/maxent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include <Eigen/Dense>

#include "wph/error.hpp"

namespace wph {

std::size_t GaussianDualProblem::n_real() const {
  std::size_t n = 0;
  for (const auto& p : params) n += p.self ? 1 : 2;
  return n;
}

GaussianDualProblem make_dual_problem(int side, const std::vector<std::vector<double>>& filters,
                                      const std::vector<int>& strides, const std::vector<Edge>& edges,
                                      const std::vector<cplx>& targets) {
  if (edges.size() != targets.size()) throw ConfigError("make_dual_problem: size mismatch");
  if (filters.size() != strides.size()) throw ConfigError("make_dual_problem: filters/strides mismatch");
  const int n = side;
  std::map<Edge, cplx> T;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Edge& e = edges[i];
    if (e.a.k != 1 || e.b.k != 1) throw ConfigError("Gaussian model constraints must have k = k' = 1");
    if (e.a.channel < 0 || e.a.channel >= static_cast<int>(filters.size()) || e.b.channel < 0 ||
        e.b.channel >= static_cast<int>(filters.size()))
      throw ConfigError("make_dual_problem: edge channel outside the filter list");
    T[e] = targets[i];
  }
  auto diag_of = [&](int c) {
    auto it = T.find({{c, 1}, {c, 1}, {0, 0}});
    if (it == T.end()) throw ConfigError("make_dual_problem: missing diagonal constraint");
    if (!(it->second.real() > 0)) throw NumericalError("make_dual_problem: nonpositive target variance");
    return it->second.real();
  };

  GaussianDualProblem prob;
  prob.side = side;
  std::vector<cplx> tw(n);
  for (int k = 0; k < n; ++k) tw[k] = std::polar(1.0, -2.0 * std::numbers::pi * k / n);
  for (const auto& [e, t] : T) {
    Edge p = hermitian_partner(e);
    const bool self = (p == e);
    if (!self && T.count(p) && p < e) continue;
    GaussianDualProblem::Param par;
    par.edge = e;
    par.fa = e.a.channel;
    par.fb = e.b.channel;
    const int s = std::max(strides[par.fa], strides[par.fb]);
    par.d1 = e.tau.n1 * s;
    par.d2 = e.tau.n2 * s;
    par.target = self ? cplx(t.real(), 0.0) : t;
    par.self = self;
    par.scale = 1.0 / std::sqrt(diag_of(par.fa) * diag_of(par.fb));
    const auto& A = filters[par.fa];
    const auto& B = filters[par.fb];
    const int d1 = wrap(par.d1, n), d2 = wrap(par.d2, n);
    for (int m1 = 0; m1 < n; ++m1)
      for (int m2 = 0; m2 < n; ++m2) {
        std::size_t i = static_cast<std::size_t>(m1) * n + m2;
        std::size_t j = static_cast<std::size_t>((n - m1) % n) * n + (n - m2) % n;
        double pw = A[i] * B[i], pn = A[j] * B[j];
        if (pw == 0.0 && pn == 0.0) continue;
        const cplx ph = tw[(static_cast<long>(m1) * d1 + static_cast<long>(m2) * d2) % n];
        par.bins.push_back(static_cast<int>(i));
        par.phi.push_back(0.5 * (pw * ph + pn * std::conj(ph)));
      }
    prob.params.push_back(std::move(par));
  }
  return prob;
}

GaussianDualProblem make_dual_problem(const CovarianceTable& targets, const WaveletBank& bank) {
  std::vector<int> strides;
  for (int c = 0; c < bank.channels(); ++c) strides.push_back(bank.stride(c));
  std::vector<Edge> edges;
  std::vector<cplx> vals;
  for (std::size_t i = 0; i < targets.edges.size(); ++i) {
    const Edge& e = targets.edges[i];
    if (e.a.k != 1 || e.b.k != 1) continue;
    edges.push_back(e);
    vals.push_back(targets.cov[i]);
  }
  if (edges.empty()) throw ConfigError("no k = 1 constraints in the target table");
  return make_dual_problem(bank.side, bank.filters, strides, edges, vals);
}

namespace {

std::vector<cplx> twiddles(int n) {
  std::vector<cplx> tw(n);
  for (int k = 0; k < n; ++k) tw[k] = std::polar(1.0, -2.0 * std::numbers::pi * k / n);
  return tw;
}

}  // namespace

std::vector<double> averaged_periodogram(const std::vector<Field>& xs) {
  if (xs.empty()) throw ConfigError("averaged_periodogram: no fields");
  const int n = xs.front().side;
  const double d = static_cast<double>(n) * n;
  std::vector<double> P(static_cast<std::size_t>(n) * n, 0.0);
  for (const auto& x : xs) {
    if (x.side != n) throw ConfigError("averaged_periodogram: sides differ");
    Field xh = dft2(x);
    xh[0] = 0;  // centred
    for (std::size_t i = 0; i < P.size(); ++i) P[i] += std::norm(xh[i]) / (d * xs.size());
  }
  return P;
}

GaussianDualProblem make_dual_problem(const std::vector<Field>& xs, const WaveletBank& bank,
                                      const ModelSpec& spec) {
  if (spec.J != bank.J || spec.Q != bank.Q) throw ConfigError("model J/Q do not match the bank");
  const auto P = averaged_periodogram(xs);
  if (xs.front().side != bank.side) throw ConfigError("field side does not match the bank");
  const int n = bank.side;
  const auto tw = twiddles(n);
  std::vector<int> strides;
  for (int c = 0; c < bank.channels(); ++c) strides.push_back(bank.stride(c));
  std::vector<Edge> edges;
  std::vector<cplx> vals;
  for (const Edge& e : build_foveal_edges(spec).edges) {
    if (e.a.k != 1 || e.b.k != 1) continue;
    const int s = std::max(strides[e.a.channel], strides[e.b.channel]);
    const int d1 = wrap(e.tau.n1 * s, n), d2 = wrap(e.tau.n2 * s, n);
    const auto& A = bank.filters[e.a.channel];
    const auto& B = bank.filters[e.b.channel];
    cplx acc = 0;
    for (int m1 = 0; m1 < n; ++m1)
      for (int m2 = 0; m2 < n; ++m2) {
        const std::size_t i = static_cast<std::size_t>(m1) * n + m2;
        const double w = P[i] * A[i] * B[i];
        if (w != 0.0) acc += w * tw[(static_cast<long>(m1) * d1 + static_cast<long>(m2) * d2) % n];
      }
    edges.push_back(e);
    vals.push_back(acc / (static_cast<double>(n) * n));
  }
  if (edges.empty()) throw ConfigError("model has no k = 1 constraints");
  return make_dual_problem(n, bank.filters, strides, edges, vals);
}

namespace {

template <class F>
void for_each_kernel(const GaussianDualProblem::Param& par, F&& f) {
  for (std::size_t i = 0; i < par.bins.size(); ++i) f(par.bins[i], par.phi[i]);
}

}  // namespace

double dual_objective(const GaussianDualProblem& prob, const std::vector<cplx>& betas,
                      std::vector<cplx>* grad, std::vector<double>* spectrum) {
  const int n = prob.side;
  const std::size_t d = static_cast<std::size_t>(n) * n;
  const double dd = static_cast<double>(d);
  std::vector<double> lam(d, 0.0);
  for (std::size_t p = 0; p < prob.params.size(); ++p) {
    const auto& par = prob.params[p];
    const cplx beta = betas[p];
    if (par.self) {
      for_each_kernel(par, [&](int b, cplx phi) { lam[b] += beta.real() * phi.real(); });
    } else {
      for_each_kernel(par, [&](int b, cplx phi) { lam[b] += 2.0 * (beta * phi).real(); });
    }
  }
  double logsum = 0;
  for (std::size_t i = 0; i < d; ++i) {
    if (!(lam[i] > 0)) return std::numeric_limits<double>::infinity();
    logsum -= std::log(lam[i]);
  }
  double lin = 0;
  for (std::size_t p = 0; p < prob.params.size(); ++p) {
    const auto& par = prob.params[p];
    if (par.self)
      lin += 0.5 * dd * betas[p].real() * par.target.real();
    else
      lin += dd * (betas[p] * par.target).real();
  }
  const double H = lin + 0.5 * logsum + 0.5 * dd * std::log(2.0 * std::numbers::pi);
  if (grad || spectrum) {
    std::vector<double> P(d);
    for (std::size_t i = 0; i < d; ++i) P[i] = 1.0 / lam[i];
    if (grad) {
      grad->assign(prob.params.size(), cplx{});
      for (std::size_t p = 0; p < prob.params.size(); ++p) {
        const auto& par = prob.params[p];
        cplx acc = 0;
        for_each_kernel(par, [&](int b, cplx phi) { acc += P[b] * phi; });
        if (par.self)
          (*grad)[p] = 0.5 * (dd * par.target.real() - acc.real());
        else
          (*grad)[p] = cplx(dd * par.target.real() - acc.real(), -dd * par.target.imag() + acc.imag());
      }
    }
    if (spectrum) *spectrum = std::move(P);
  }
  return H;
}

std::vector<cplx> model_covariances(const GaussianDualProblem& prob, const std::vector<double>& spectrum) {
  const int n = prob.side;
  const double dd = static_cast<double>(n) * n;
  std::vector<cplx> out(prob.params.size());
  for (std::size_t p = 0; p < prob.params.size(); ++p) {
    cplx acc = 0;
    for_each_kernel(prob.params[p], [&](int b, cplx phi) { acc += spectrum[b] * phi; });
    out[p] = acc / dd;
  }
  return out;
}

namespace {

// Dual in theta coordinates: Lambda(w) = sum_r theta_r g_r(w). The Hessian of H / d is
// 1/(2d) sum_w g_r(w) g_s(w) / Lambda(w)^2.
struct ThetaBasis {
  struct Term {
    int r;
    double g;
  };
  std::vector<std::vector<Term>> per_bin;

  explicit ThetaBasis(const GaussianDualProblem& prob)
      : per_bin(static_cast<std::size_t>(prob.side) * prob.side) {
    int r = 0;
    for (const auto& par : prob.params) {
      for (std::size_t i = 0; i < par.bins.size(); ++i) {
        const cplx phi = par.phi[i];
        auto& t = per_bin[par.bins[i]];
        if (par.self) {
          t.push_back({r, par.scale * phi.real()});
        } else {
          t.push_back({r, 2.0 * par.scale * phi.real()});
          t.push_back({r + 1, -2.0 * par.scale * phi.imag()});
        }
      }
      r += par.self ? 1 : 2;
    }
    for (auto& t : per_bin) std::sort(t.begin(), t.end(), [](const Term& a, const Term& b) { return a.r < b.r; });
  }

  // Lower triangle only, which is all LDLT reads.
  Eigen::MatrixXd hessian(const std::vector<double>& theta) const {
    const auto nr = static_cast<Eigen::Index>(theta.size());
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(nr, nr);
    double* hd = h.data();
    for (const auto& terms : per_bin) {
      double lam = 0;
      for (const auto& t : terms) lam += theta[t.r] * t.g;
      const double w = 1.0 / (lam * lam);
      for (std::size_t i = 0; i < terms.size(); ++i) {
        double* col = hd + static_cast<std::size_t>(terms[i].r) * nr;
        const double wa = w * terms[i].g;
        for (std::size_t k = i; k < terms.size(); ++k) col[terms[k].r] += wa * terms[k].g;
      }
    }
    return h * (0.5 / static_cast<double>(per_bin.size()));
  }
};

double max_abs(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

GaussianDualState fit_gaussian_model(const GaussianDualProblem& prob, double gtol, int max_iter,
                                     const LbfgsOptions& base) {
  const std::size_t np = prob.params.size();
  const double dd = static_cast<double>(prob.side) * prob.side;
  auto to_betas = [&](const std::vector<double>& th) {
    std::vector<cplx> b(np);
    std::size_t k = 0;
    for (std::size_t p = 0; p < np; ++p) {
      const double s = prob.params[p].scale;
      if (prob.params[p].self) {
        b[p] = th[k++] * s;
      } else {
        b[p] = cplx(th[k] * s, th[k + 1] * s);
        k += 2;
      }
    }
    return b;
  };
  std::vector<double> theta(prob.n_real(), 0.0);
  {
    std::size_t k = 0;
    for (const auto& par : prob.params) {
      if (par.self) theta[k] = 1.0;
      k += par.self ? 1 : 2;
    }
  }
  ObjectiveFn fn = [&](const std::vector<double>& th, std::vector<double>& g) {
    std::vector<cplx> gb;
    double H = dual_objective(prob, to_betas(th), &gb);
    if (!std::isfinite(H)) return H;
    std::size_t k = 0;
    for (std::size_t p = 0; p < np; ++p) {
      const double s = prob.params[p].scale / dd;
      if (prob.params[p].self) {
        g[k++] = gb[p].real() * s;
      } else {
        g[k++] = gb[p].real() * s;
        g[k++] = gb[p].imag() * s;
      }
    }
    return H / dd;
  };
  std::vector<double> g0(theta.size());
  if (!std::isfinite(fn(theta, g0)))
    throw NumericalError("Gaussian model: constraints do not cover every frequency (infeasible start)");

  LbfgsOptions opt = base;
  opt.gtol = gtol;
  opt.max_iter = max_iter;
  LbfgsResult res = lbfgs_minimize(fn, theta, opt);

  // L-BFGS stalls on this dual when the constrained spectrum is rough; the exact Hessian
  // is cheap, so finish with damped Newton steps.
  if (res.status != LbfgsStatus::gtol && std::isfinite(res.f)) {
    const ThetaBasis basis(prob);
    std::vector<double> g(theta.size()), gt(theta.size()), trial(theta.size());
    double f = fn(res.x, g);
    for (int it = 0; it < 200 && max_abs(g) > gtol; ++it) {
      Eigen::MatrixXd h = basis.hessian(res.x);
      const double ridge = 1e-12 * std::max(1.0, h.diagonal().maxCoeff());
      h.diagonal().array() += ridge;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
      Eigen::VectorXd step = ldlt.solve(-Eigen::Map<Eigen::VectorXd>(g.data(), g.size()));
      if (ldlt.info() != Eigen::Success || !step.allFinite()) break;
      const double slope = step.dot(Eigen::Map<Eigen::VectorXd>(g.data(), g.size()));
      if (!(slope < 0)) break;
      double t = 1.0, ft = f;
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
        for (std::size_t i = 0; i < trial.size(); ++i) trial[i] = res.x[i] + t * step[i];
        ft = fn(trial, gt);
        if (std::isfinite(ft) && ft <= f + 1e-4 * t * slope) {
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
      res.x = trial;
      g = gt;
      f = ft;
      ++res.iterations;
      res.losses.push_back(f);
    }
    res.f = f;
    if (max_abs(g) <= gtol) res.status = LbfgsStatus::gtol;
  }

  GaussianDualState st;
  st.betas = to_betas(res.x);
  std::vector<cplx> gb;
  st.H = dual_objective(prob, st.betas, &gb, &st.spectrum);
  st.feasible = std::isfinite(st.H);
  st.iterations = res.iterations;
  st.status = res.status;
  st.converged = res.status == LbfgsStatus::gtol;
  for (std::size_t p = 0; p < np; ++p)
    st.grad_max = std::max(st.grad_max, std::abs(gb[p]) * prob.params[p].scale / dd);
  if (st.feasible) {
    const auto K = model_covariances(prob, st.spectrum);
    for (std::size_t p = 0; p < np; ++p)
      st.misfit = std::max(st.misfit, std::abs(K[p] - prob.params[p].target) * prob.params[p].scale);
  }
  for (double f : res.losses) st.history.push_back(f * dd);
  return st;
}

std::vector<Field> sample_gaussian(const std::vector<double>& spectrum, int side, std::uint64_t seed,
                                   int count) {
  if (spectrum.size() != static_cast<std::size_t>(side) * side)
    throw ConfigError("sample_gaussian: spectrum size mismatch");
  for (double p : spectrum)
    if (!(p >= 0) || !std::isfinite(p)) throw NumericalError("sample_gaussian: infeasible spectrum");
  std::vector<Field> out;
  for (int r = 0; r < count; ++r) {
    Field w = dft2(white_noise(side, 1.0, derive_seed(seed, static_cast<std::uint64_t>(r))));
    for (std::size_t i = 0; i < w.size(); ++i) w[i] *= std::sqrt(spectrum[i]);
    Field x = idft2(w);
    for (auto& v : x.data) v = v.real();
    out.push_back(std::move(x));
  }
  return out;
}

std::vector<Field> sample_gaussian(const GaussianDualState& state, int side, std::uint64_t seed,
                                   int count) {
  if (!state.feasible) throw NumericalError("sample_gaussian: infeasible state");
  return sample_gaussian(state.spectrum, side, seed, count);
}

}  // namespace wph
