#include "wph/graph.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

#include "wph/error.hpp"

namespace wph {

Edge hermitian_partner(const Edge& e) { return {e.b, e.a, {-e.tau.n1, -e.tau.n2}}; }

int SymmetryGroup::order() const {
  return (rotations ? Q : 1) * (reflection ? 2 : 1) * (sign_change ? 2 : 1);
}

std::vector<GroupElement> group_elements(const SymmetryGroup& g) {
  std::vector<GroupElement> out;
  for (int s : {1, -1}) {
    if (s < 0 && !g.sign_change) continue;
    for (int f = 0; f < 2; ++f) {
      if (f == 1 && !g.reflection) continue;
      int neta = g.rotations ? g.Q : 1;
      for (int eta = 0; eta < neta; ++eta) out.push_back({s, eta, f == 1});
    }
  }
  return out;
}

int act_channel(const GroupElement& g, int channel, int J, int Q) {
  if (channel == J * Q) return channel;
  int j0 = channel / Q;
  int l = channel % Q;
  if (g.flip) l = (Q - l) % Q;
  l = (l + g.eta) % Q;
  return j0 * Q + l;
}

VertexClass act(const GroupElement& g, const VertexClass& v, int J, int Q) {
  return {act_channel(g, v.channel, J, Q), v.k};
}

Edge act(const GroupElement& g, const Edge& e, int J, int Q) {
  if (g.eta != 0 && (e.tau.n1 != 0 || e.tau.n2 != 0))
    throw ConfigError("rotations only act on edges with zero spatial offset");
  Edge out{act(g, e.a, J, Q), act(g, e.b, J, Q), e.tau};
  if (g.flip) out.tau.n2 = -out.tau.n2;
  return out;
}

ModelSpec model_preset(const std::string& name, int J, int Q) {
  ModelSpec s;
  s.name = name;
  s.J = J;
  s.Q = Q;
  s.group.Q = Q;
  if (name == "A") {
    s.k_min = 1, s.k_max = 1, s.dn = 2, s.dj = 0, s.dl = 0;
  } else if (name == "B") {
    s.k_min = 0, s.k_max = 1, s.dn = 2, s.dj = 0, s.dl = Q / 4;
  } else if (name == "C") {
    s.k_min = 0, s.k_max = 2, s.dn = 2, s.dj = 1, s.dl = Q / 4;
    s.policy = PairPolicy::restricted;
  } else if (name == "D") {
    s.k_min = 0, s.k_max = 2, s.dn = 0, s.dj = 1, s.dl = Q / 4;
    s.policy = PairPolicy::restricted;
    s.group.rotations = true;
  } else {
    throw ConfigError("unknown model preset '" + name + "'");
  }
  s.spatial_k_max = 1;
  return s;
}

std::vector<VertexClass> EdgeSet::classes() const {
  std::set<VertexClass> s;
  for (const auto& e : edges) {
    s.insert(e.a);
    s.insert(e.b);
  }
  return {s.begin(), s.end()};
}

int angular_distance(int l, int lp, int Q) {
  int d = std::abs(l - lp) % Q;
  return std::min(d, Q - d);
}

namespace {

const std::set<std::pair<int, int>> restricted_same = {{0, 0}, {0, 1}, {0, 2},
                                                        {1, 1}, {1, 2}, {2, 2}};
const std::set<std::pair<int, int>> restricted_cross = {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}};

}  // namespace

EdgeSet build_foveal_edges(const ModelSpec& spec) {
  const int J = spec.J, Q = spec.Q;
  if (J < 1 || Q < 1) throw ConfigError("J and Q must be positive");
  if (!(spec.k_min <= 1 && 1 <= spec.k_max)) throw ConfigError("need k_min <= 1 <= k_max");
  if (spec.dl > Q / 2) throw ConfigError("delta_l must not exceed Q/2");
  if (spec.dn < 0 || spec.dj < 0 || spec.dl < 0) throw ConfigError("negative neighbourhood size");

  auto parity_ok = [&](int k, int kp) { return !spec.group.sign_change || (k + kp) % 2 == 0; };
  auto same_ok = [&](int k, int kp) {
    if (!parity_ok(k, kp)) return false;
    if (spec.policy == PairPolicy::full || k == kp) return true;
    return restricted_same.count({std::min(k, kp), std::max(k, kp)}) > 0;
  };
  auto cross_ok = [&](int k, int kp) {
    if (!parity_ok(k, kp)) return false;
    return spec.policy == PairPolicy::full || restricted_cross.count({k, kp}) > 0;
  };

  EdgeSet es;
  es.dn = spec.dn;
  es.dj = spec.dj;
  es.dl = spec.dl;
  for (int k = spec.k_min; k <= spec.k_max; ++k)
    for (int kp = spec.k_min; kp <= spec.k_max; ++kp) {
      if (same_ok(k, kp)) es.kpairs.push_back({k, kp});
      if (cross_ok(k, kp)) es.cross_kpairs.push_back({k, kp});
    }

  std::vector<VertexClass> classes;
  for (int c = 0; c < J * Q; ++c)
    for (int k = spec.k_min; k <= spec.k_max; ++k) classes.push_back({c, k});
  if (spec.lowpass)
    for (int k = std::max(spec.k_min, 0); k <= std::min(spec.k_max, 1); ++k)
      classes.push_back({J * Q, k});

  std::set<Edge> out;
  for (const auto& v : classes) {
    int r = (v.k <= spec.spatial_k_max && v.k >= 0) ? spec.dn : 0;
    for (int n1 = -r; n1 <= r; ++n1)
      for (int n2 = -r; n2 <= r; ++n2) out.insert({v, v, {n1, n2}});
  }
  for (const auto& v : classes) {
    if (v.channel == J * Q) continue;
    const int j = v.channel / Q + 1, l = v.channel % Q;
    for (const auto& w : classes) {
      if (w.channel == J * Q || w == v) continue;
      const int jp = w.channel / Q + 1, lp = w.channel % Q;
      if (angular_distance(l, lp, Q) > spec.dl) continue;
      if (jp == j) {
        if (same_ok(v.k, w.k)) out.insert({v, w, {0, 0}});
      } else if (jp > j && jp - j <= spec.dj) {
        if (cross_ok(v.k, w.k)) {
          out.insert({v, w, {0, 0}});
          out.insert({w, v, {0, 0}});
        }
      }
    }
  }
  es.edges.assign(out.begin(), out.end());
  return es;
}

std::size_t sufficient_statistics_count(const EdgeSet& edges, const ModelSpec& spec) {
  auto elems = group_elements(spec.group);
  std::set<Edge> reps;
  for (const auto& e : edges.edges) {
    Edge best = e;
    for (const auto& g : elems) {
      if (g.eta != 0 && (e.tau.n1 != 0 || e.tau.n2 != 0)) continue;
      best = std::min(best, act(g, e, spec.J, spec.Q));
    }
    reps.insert(best);
  }
  return reps.size();
}

}  // namespace wph
