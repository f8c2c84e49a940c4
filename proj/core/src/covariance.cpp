#include "wph/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "wph/error.hpp"
#include "wph/harmonics.hpp"

namespace wph {

int CovarianceTable::class_index(const VertexClass& v) const {
  auto it = std::lower_bound(classes.begin(), classes.end(), v);
  return (it != classes.end() && *it == v) ? static_cast<int>(it - classes.begin()) : -1;
}

int CovarianceTable::edge_index(const Edge& e) const {
  auto it = std::lower_bound(edges.begin(), edges.end(), e);
  return (it != edges.end() && *it == e) ? static_cast<int>(it - edges.begin()) : -1;
}

cplx CovarianceTable::value(const Edge& e) const {
  int i = edge_index(e);
  if (i < 0) throw ConfigError("edge not present in table");
  return cov[i];
}

std::vector<double> CovarianceTable::own_diagonal() const {
  std::vector<double> d(classes.size());
  for (std::size_t i = 0; i < classes.size(); ++i) {
    int e = edge_index({classes[i], classes[i], {0, 0}});
    if (e < 0) throw ConfigError("table lacks a diagonal edge");
    d[i] = cov[e].real();
  }
  return d;
}

MomentPlan::MomentPlan(const WaveletBank& bank, std::vector<Edge> edges, const SymmetryGroup& group)
    : side_(bank.side), J_(bank.J), Q_(bank.Q) {
  if (group.rotations && group.Q != bank.Q)
    throw ConfigError("rotation group order must match the bank's Q");
  for (int c = 0; c < bank.channels(); ++c) lattice_.push_back(bank.lattice(c));
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);
  std::set<VertexClass> cls;
  for (const auto& e : edges_) {
    for (const auto& v : {e.a, e.b})
      if (v.channel < 0 || v.channel >= bank.channels())
        throw ConfigError("edge references a channel outside the bank");
    cls.insert(e.a);
    cls.insert(e.b);
  }
  classes_.assign(cls.begin(), cls.end());

  const auto elems = group_elements(group);
  inv_order_ = 1.0 / static_cast<double>(elems.size());

  std::set<VertexClass> rcls;
  for (const auto& v : classes_)
    for (const auto& g : elems) rcls.insert(act(g, v, J_, Q_));
  raw_classes_.assign(rcls.begin(), rcls.end());
  auto raw_class_index = [&](const VertexClass& v) {
    return static_cast<int>(std::lower_bound(raw_classes_.begin(), raw_classes_.end(), v) -
                            raw_classes_.begin());
  };

  auto sgn = [](const GroupElement& g, int k) { return (g.sign < 0 && (k % 2 != 0)) ? -1.0 : 1.0; };

  mean_terms_.resize(classes_.size());
  for (std::size_t i = 0; i < classes_.size(); ++i)
    for (const auto& g : elems)
      mean_terms_[i].push_back({raw_class_index(act(g, classes_[i], J_, Q_)), sgn(g, classes_[i].k)});

  std::map<Edge, int> raw_index;
  std::vector<Edge> raw_list;
  prod_terms_.resize(edges_.size());
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const Edge& e = edges_[i];
    for (const auto& g : elems) {
      Edge r = act(g, e, J_, Q_);
      auto it = raw_index.find(r);
      int idx;
      if (it == raw_index.end()) {
        idx = static_cast<int>(raw_list.size());
        raw_index.emplace(r, idx);
        raw_list.push_back(r);
      } else {
        idx = it->second;
      }
      prod_terms_[i].push_back({idx, sgn(g, e.a.k) * sgn(g, e.b.k)});
    }
  }
  for (const auto& r : raw_list) {
    RawEdge re;
    re.a = raw_class_index(r.a);
    re.b = raw_class_index(r.b);
    re.La = lattice_[r.a.channel];
    re.Lb = lattice_[r.b.channel];
    re.L = std::min(re.La, re.Lb);
    re.fa = re.La / re.L;
    re.fb = re.Lb / re.L;
    if (2 * std::abs(r.tau.n1) > re.L || 2 * std::abs(r.tau.n2) > re.L)
      throw ConfigError("edge offset exceeds half the coefficient lattice");
    re.t1 = wrap(r.tau.n1, re.L);
    re.t2 = wrap(r.tau.n2, re.L);
    raw_edges_.push_back(re);
  }
}

std::vector<std::vector<cplx>> MomentPlan::harmonic_fields(const WaveletCoeffs& z) const {
  std::vector<std::vector<cplx>> F(raw_classes_.size());
  for (std::size_t i = 0; i < raw_classes_.size(); ++i) {
    const auto& src = z.values[raw_classes_[i].channel];
    const int k = raw_classes_[i].k;
    F[i].resize(src.size());
    for (std::size_t p = 0; p < src.size(); ++p) F[i][p] = phase_harmonic(src[p], k);
  }
  return F;
}

MomentPlan::Raw MomentPlan::raw_moments(const std::vector<std::vector<cplx>>& F) const {
  Raw raw;
  raw.m.resize(raw_classes_.size());
  for (std::size_t i = 0; i < raw_classes_.size(); ++i) {
    cplx s = 0;
    for (const auto& v : F[i]) s += v;
    raw.m[i] = s / static_cast<double>(F[i].size());
  }
  raw.P.resize(raw_edges_.size());
  for (std::size_t r = 0; r < raw_edges_.size(); ++r) {
    const RawEdge& e = raw_edges_[r];
    const cplx* fa = F[e.a].data();
    const cplx* fb = F[e.b].data();
    cplx s = 0;
    for (int n1 = 0; n1 < e.L; ++n1) {
      const cplx* ra = fa + static_cast<std::size_t>(n1 * e.fa) * e.La;
      const cplx* rb = fb + static_cast<std::size_t>(((n1 + e.t1) % e.L) * e.fb) * e.Lb;
      for (int n2 = 0; n2 < e.L; ++n2)
        s += ra[n2 * e.fa] * std::conj(rb[((n2 + e.t2) % e.L) * e.fb]);
    }
    raw.P[r] = s / (static_cast<double>(e.L) * e.L);
  }
  return raw;
}

std::vector<cplx> MomentPlan::averaged_means(const Raw& raw) const {
  std::vector<cplx> out(classes_.size());
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    cplx s = 0;
    for (const auto& t : mean_terms_[i]) s += t.sign * raw.m[t.raw];
    out[i] = s * inv_order_;
  }
  return out;
}

std::vector<cplx> MomentPlan::averaged_products(const Raw& raw) const {
  std::vector<cplx> out(edges_.size());
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    cplx s = 0;
    for (const auto& t : prod_terms_[i]) s += t.sign * raw.P[t.raw];
    out[i] = s * inv_order_;
  }
  return out;
}

void MomentPlan::backward(const std::vector<std::vector<cplx>>& F, const std::vector<cplx>& cot_mean,
                          const std::vector<cplx>& cot_prod,
                          std::vector<std::vector<cplx>>& cotF) const {
  if (cotF.size() != F.size()) {
    cotF.resize(F.size());
    for (std::size_t i = 0; i < F.size(); ++i) cotF[i].assign(F[i].size(), cplx{});
  }
  std::vector<cplx> cm(raw_classes_.size()), cp(raw_edges_.size());
  for (std::size_t i = 0; i < classes_.size(); ++i)
    for (const auto& t : mean_terms_[i]) cm[t.raw] += t.sign * inv_order_ * cot_mean[i];
  for (std::size_t i = 0; i < edges_.size(); ++i)
    for (const auto& t : prod_terms_[i]) cp[t.raw] += t.sign * inv_order_ * cot_prod[i];

  for (std::size_t i = 0; i < raw_classes_.size(); ++i) {
    if (cm[i] == cplx{}) continue;
    const cplx g = cm[i] / static_cast<double>(F[i].size());
    for (auto& v : cotF[i]) v += g;
  }
  for (std::size_t r = 0; r < raw_edges_.size(); ++r) {
    if (cp[r] == cplx{}) continue;
    const RawEdge& e = raw_edges_[r];
    const cplx g = cp[r] / (static_cast<double>(e.L) * e.L);
    const cplx gc = std::conj(g);
    const cplx* fa = F[e.a].data();
    const cplx* fb = F[e.b].data();
    cplx* ga = cotF[e.a].data();
    cplx* gb = cotF[e.b].data();
    for (int n1 = 0; n1 < e.L; ++n1) {
      const std::size_t oa = static_cast<std::size_t>(n1 * e.fa) * e.La;
      const std::size_t ob = static_cast<std::size_t>(((n1 + e.t1) % e.L) * e.fb) * e.Lb;
      for (int n2 = 0; n2 < e.L; ++n2) {
        const std::size_t pa = oa + n2 * e.fa;
        const std::size_t pb = ob + ((n2 + e.t2) % e.L) * e.fb;
        ga[pa] += g * fb[pb];
        gb[pb] += gc * fa[pa];
      }
    }
  }
}

WaveletCoeffs MomentPlan::chain_to_coeffs(const WaveletCoeffs& z,
                                          const std::vector<std::vector<cplx>>& cotF) const {
  WaveletCoeffs out;
  out.lattice = z.lattice;
  out.values.resize(z.values.size());
  for (std::size_t c = 0; c < z.values.size(); ++c) out.values[c].assign(z.values[c].size(), cplx{});
  for (std::size_t i = 0; i < raw_classes_.size(); ++i) {
    const int c = raw_classes_[i].channel;
    const int k = raw_classes_[i].k;
    const auto& zc = z.values[c];
    auto& dst = out.values[c];
    const auto& G = cotF[i];
    if (k == 1) {
      for (std::size_t p = 0; p < zc.size(); ++p) dst[p] += G[p];
      continue;
    }
    for (std::size_t p = 0; p < zc.size(); ++p) {
      Wirtinger w = harmonic_derivative(zc[p], k);
      dst[p] += G[p] * std::conj(w.dz) + std::conj(G[p]) * w.dzbar;
    }
  }
  return out;
}

namespace {

CovarianceTable assemble(const MomentPlan& plan, const MomentPlan::Raw& raw, const WaveletBank& bank,
                         const SymmetryGroup& group) {
  CovarianceTable t;
  t.side = bank.side;
  t.J = bank.J;
  t.Q = bank.Q;
  t.group = group;
  t.classes = plan.classes();
  t.edges = plan.edges();
  t.mean = plan.averaged_means(raw);
  auto P = plan.averaged_products(raw);
  t.cov.resize(P.size());
  for (std::size_t i = 0; i < P.size(); ++i) {
    const Edge& e = t.edges[i];
    cplx ma = t.mean[t.class_index(e.a)];
    cplx mb = t.mean[t.class_index(e.b)];
    t.cov[i] = P[i] - ma * std::conj(mb);
  }
  return t;
}

}  // namespace

std::vector<cplx> estimate_mean(const Field& x, const WaveletBank& bank,
                                const std::vector<VertexClass>& classes,
                                const SymmetryGroup& group) {
  std::vector<Edge> diag;
  for (const auto& v : classes) diag.push_back({v, v, {0, 0}});
  MomentPlan plan(bank, diag, group);
  auto z = wavelet_transform(x, bank);
  auto raw = plan.raw_moments(plan.harmonic_fields(z));
  auto m = plan.averaged_means(raw);
  std::vector<cplx> out;
  for (const auto& v : classes) {
    auto it = std::lower_bound(plan.classes().begin(), plan.classes().end(), v);
    out.push_back(m[it - plan.classes().begin()]);
  }
  return out;
}

CovarianceTable estimate_covariance(const Field& x, const WaveletBank& bank, const EdgeSet& edges,
                                    const SymmetryGroup& group) {
  return estimate_covariance(std::vector<Field>{x}, bank, edges, group);
}

CovarianceTable estimate_covariance(const std::vector<Field>& xs, const WaveletBank& bank,
                                    const EdgeSet& edges, const SymmetryGroup& group) {
  if (xs.empty()) throw ConfigError("estimate_covariance: no realizations");
  if (edges.edges.empty()) throw ConfigError("estimate_covariance: empty edge set");
  MomentPlan plan(bank, edges.edges, group);
  MomentPlan::Raw acc;
  for (const auto& x : xs) {
    auto raw = plan.raw_moments(plan.harmonic_fields(wavelet_transform(x, bank)));
    if (acc.m.empty()) {
      acc = std::move(raw);
    } else {
      for (std::size_t i = 0; i < acc.m.size(); ++i) acc.m[i] += raw.m[i];
      for (std::size_t i = 0; i < acc.P.size(); ++i) acc.P[i] += raw.P[i];
    }
  }
  const double inv = 1.0 / static_cast<double>(xs.size());
  for (auto& v : acc.m) v *= inv;
  for (auto& v : acc.P) v *= inv;
  auto t = assemble(plan, acc, bank, group);
  t.source = xs.size() == 1 ? "single realization" : std::to_string(xs.size()) + " realizations";
  return t;
}

CovarianceTable normalize_correlations(const CovarianceTable& table,
                                       const std::vector<double>& reference_diag) {
  if (reference_diag.size() != table.classes.size())
    throw ConfigError("normalize_correlations: diagonal size mismatch");
  for (std::size_t i = 0; i < reference_diag.size(); ++i)
    if (!(reference_diag[i] > 0)) {
      const auto& v = table.classes[i];
      throw NumericalError("degenerate channel " + std::to_string(v.channel) + " k=" +
                           std::to_string(v.k) + ": zero reference variance");
    }
  CovarianceTable out = table;
  for (std::size_t i = 0; i < out.edges.size(); ++i) {
    const Edge& e = out.edges[i];
    double da = reference_diag[table.class_index(e.a)];
    double db = reference_diag[table.class_index(e.b)];
    out.cov[i] = table.cov[i] / std::sqrt(da * db);
  }
  out.normalized = true;
  out.diag = reference_diag;
  return out;
}

ReducedTable angular_fourier_reduce(const CovarianceTable& table) {
  const int Q = table.Q, J = table.J;
  if (!table.group.rotations && Q != 1)
    throw ConfigError("angular_fourier_reduce: rotations are not in the group");
  // blocks keyed by (j, k, j', k')
  std::map<std::array<int, 4>, std::vector<cplx>> blocks;
  ReducedTable out;
  for (std::size_t i = 0; i < table.edges.size(); ++i) {
    const Edge& e = table.edges[i];
    if (e.tau.n1 != 0 || e.tau.n2 != 0) continue;
    if (e.a.channel == J * Q || e.b.channel == J * Q) continue;
    std::array<int, 4> key{e.a.channel / Q + 1, e.a.k, e.b.channel / Q + 1, e.b.k};
    auto& blk = blocks[key];
    if (blk.empty()) blk.assign(static_cast<std::size_t>(Q) * Q, cplx{});
    blk[static_cast<std::size_t>(e.a.channel % Q) * Q + e.b.channel % Q] = table.cov[i];
    ++out.unreduced_size;
  }
  const double pi = std::numbers::pi;
  for (const auto& [key, K] : blocks) {
    for (int m = 0; m < Q; ++m)
      for (int mp = 0; mp < Q; ++mp) {
        cplx s = 0;
        for (int l = 0; l < Q; ++l)
          for (int lp = 0; lp < Q; ++lp)
            s += K[static_cast<std::size_t>(l) * Q + lp] *
                 std::polar(1.0, -2.0 * pi * (double(m) * l - double(mp) * lp) / Q);
        s /= static_cast<double>(Q);
        out.total_energy += std::norm(s);
        if (m != mp) {
          out.offdiag_energy += std::norm(s);
          continue;
        }
        if (table.group.reflection) s = s.real();
        out.entries.push_back({key[0], key[1], key[2], key[3], m, s});
      }
  }
  return out;
}

}  // namespace wph
