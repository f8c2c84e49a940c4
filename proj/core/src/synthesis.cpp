#include "wph/synthesis.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <cmath>
#include <thread>

#include "wph/error.hpp"

namespace wph {

SynthesisTarget make_target(const Field& reference, const ModelSpec& spec,
                            std::shared_ptr<const WaveletBank> bank) {
  if (reference.side != bank->side) throw ConfigError("reference side does not match the bank");
  if (spec.J != bank->J || spec.Q != bank->Q) throw ConfigError("model J/Q do not match the bank");
  SynthesisTarget t;
  t.spec = spec;
  t.bank = bank;
  EdgeSet es = build_foveal_edges(spec);
  if (es.edges.empty()) throw ConfigError("empty edge set");
  SymmetryGroup g = spec.group;
  g.Q = bank->Q;
  auto plan = std::make_shared<MomentPlan>(*bank, es.edges, g);
  auto raw = plan->raw_moments(plan->harmonic_fields(wavelet_transform(reference, *bank)));
  t.mean = plan->averaged_means(raw);
  auto P = plan->averaged_products(raw);
  const auto& classes = plan->classes();
  const auto& edges = plan->edges();
  auto cls = [&](const VertexClass& v) {
    return static_cast<std::size_t>(std::lower_bound(classes.begin(), classes.end(), v) - classes.begin());
  };
  std::vector<cplx> K(P.size());
  for (std::size_t i = 0; i < P.size(); ++i)
    K[i] = P[i] - t.mean[cls(edges[i].a)] * std::conj(t.mean[cls(edges[i].b)]);
  t.diag.assign(classes.size(), 0.0);
  for (std::size_t i = 0; i < edges.size(); ++i)
    if (edges[i].a == edges[i].b && edges[i].tau == Offset{}) t.diag[cls(edges[i].a)] = K[i].real();
  for (std::size_t c = 0; c < classes.size(); ++c)
    if (!(t.diag[c] > 0))
      throw NumericalError("degenerate reference channel " + std::to_string(classes[c].channel) +
                           " k=" + std::to_string(classes[c].k));
  t.corr.resize(K.size());
  for (std::size_t i = 0; i < K.size(); ++i)
    t.corr[i] = K[i] / std::sqrt(t.diag[cls(edges[i].a)] * t.diag[cls(edges[i].b)]);
  double s2 = 0;
  for (const auto& v : reference.data) s2 += std::norm(v);
  t.sigma2 = s2 / static_cast<double>(reference.size());
  t.plan = std::move(plan);
  return t;
}

double MicrocanonicalObjective::value(const Field& x) const {
  std::vector<double> g;
  return value_and_gradient(to_real_vector(x), g);
}

double MicrocanonicalObjective::value_and_gradient(const std::vector<double>& xv,
                                                   std::vector<double>& grad) const {
  const auto& plan = *t_.plan;
  const auto& bank = *t_.bank;
  const Field x = from_real_vector(xv, bank.side);
  const WaveletCoeffs z = wavelet_transform(x, bank);
  const auto F = plan.harmonic_fields(z);
  const auto raw = plan.raw_moments(F);
  const auto Mx = plan.averaged_means(raw);
  const auto P = plan.averaged_products(raw);
  const auto& classes = plan.classes();
  const auto& edges = plan.edges();
  auto cls = [&](const VertexClass& v) {
    return static_cast<std::size_t>(std::lower_bound(classes.begin(), classes.end(), v) - classes.begin());
  };
  const auto& Mr = t_.mean;
  double f = 0;
  std::vector<cplx> cot_prod(edges.size()), cot_mean(classes.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::size_t a = cls(edges[i].a), b = cls(edges[i].b);
    const cplx K = P[i] - Mx[a] * std::conj(Mr[b]) - Mr[a] * std::conj(Mx[b]) + Mr[a] * std::conj(Mr[b]);
    const double nrm = 1.0 / std::sqrt(t_.diag[a] * t_.diag[b]);
    const cplx delta = K * nrm - t_.corr[i];
    f += std::norm(delta);
    const cplx kbar = delta * nrm;
    cot_prod[i] = kbar;
    cot_mean[a] -= kbar * Mr[b];
    cot_mean[b] -= std::conj(kbar) * Mr[a];
  }
  if (grad.size() != xv.size()) grad.assign(xv.size(), 0.0);
  std::vector<std::vector<cplx>> cotF;
  plan.backward(F, cot_mean, cot_prod, cotF);
  const WaveletCoeffs gz = plan.chain_to_coeffs(z, cotF);
  const Field gx = adjoint_transform(gz, bank);
  for (std::size_t i = 0; i < xv.size(); ++i) grad[i] = 2.0 * gx[i].real();
  return f;
}

std::vector<double> to_real_vector(const Field& x) {
  std::vector<double> v(x.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = x[i].real();
  return v;
}

Field from_real_vector(const std::vector<double>& v, int side) {
  Field x(side);
  for (std::size_t i = 0; i < v.size(); ++i) x[i] = v[i];
  return x;
}

double objective(const Field& x, const SynthesisTarget& target) {
  return MicrocanonicalObjective(target).value(x);
}

Field objective_gradient(const Field& x, const SynthesisTarget& target) {
  std::vector<double> g;
  MicrocanonicalObjective(target).value_and_gradient(to_real_vector(x), g);
  return from_real_vector(g, x.side);
}

LbfgsResult run_microcanonical(const SynthesisTarget& target, const Field& x0, double eps_abs,
                               const IterationHook& hook) {
  MicrocanonicalObjective obj(target);
  LbfgsOptions opt;
  const auto& o = target.spec.opt;
  opt.memory = o.memory;
  opt.c1 = o.c1;
  opt.c2 = o.c2;
  opt.gtol = o.gtol;
  opt.max_iter = o.max_iter;
  opt.gamma_scaling = o.gamma_scaling;
  opt.f_target = eps_abs;
  ObjectiveFn fn = [&](const std::vector<double>& x, std::vector<double>& g) {
    return obj.value_and_gradient(x, g);
  };
  return lbfgs_minimize(fn, to_real_vector(x0), opt, hook);
}

SynthesisResult synthesize(const SynthesisTarget& target, int restarts, std::uint64_t seed, int threads) {
  if (restarts < 1) throw ConfigError("restart count must be >= 1");
  if (threads < 1) threads = 1;
  const int side = target.bank->side;
  SynthesisResult out;
  out.runs.resize(restarts);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int r; (r = next.fetch_add(1)) < restarts;) {
      RestartResult& rr = out.runs[r];
      rr.seed = derive_seed(seed, static_cast<std::uint64_t>(r));
      try {
        Field x0 = white_noise(side, std::sqrt(target.sigma2), rr.seed);
        MicrocanonicalObjective obj(target);
        rr.initial_loss = obj.value(x0);
        const double eps = target.spec.opt.eps_rel * rr.initial_loss;
        LbfgsResult res = run_microcanonical(target, x0, eps);
        rr.sample = from_real_vector(res.x, side);
        rr.final_loss = res.f;
        rr.iterations = res.iterations;
        rr.armijo_fallbacks = res.armijo_fallbacks;
        rr.status = res.status;
        rr.losses = std::move(res.losses);
        rr.success = res.f < eps || res.f == 0.0;
        rr.diagnostic = to_string(res.status);
      } catch (const std::exception& e) {
        rr.final_loss = std::numeric_limits<double>::infinity();
        rr.diagnostic = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int i = 1; i < std::min(threads, restarts); ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (int r = 0; r < restarts; ++r)
    if (out.best < 0 || out.runs[r].final_loss < out.runs[out.best].final_loss) out.best = r;
  return out;
}

SynthesisResult synthesize(const Field& reference, const ModelSpec& spec,
                           std::shared_ptr<const WaveletBank> bank, int restarts, std::uint64_t seed,
                           int threads) {
  return synthesize(make_target(reference, spec, std::move(bank)), restarts, seed, threads);
}

}  // namespace wph
