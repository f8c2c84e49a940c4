#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace wph {

struct VertexClass {
  int channel = 0;
  int k = 1;
  auto operator<=>(const VertexClass&) const = default;
};

struct Offset {
  int n1 = 0;
  int n2 = 0;
  auto operator<=>(const Offset&) const = default;
};

// Edge (a, b, tau) with the position of a fixed at the origin. tau is counted
// on the coarser lattice of the two channels.
struct Edge {
  VertexClass a;
  VertexClass b;
  Offset tau;
  auto operator<=>(const Edge&) const = default;
};

Edge hermitian_partner(const Edge& e);

struct SymmetryGroup {
  bool rotations = false;
  bool reflection = false;
  bool sign_change = false;
  int Q = 1;

  // Number of non-translation elements.
  int order() const;
};

// One non-translation group element: x -> sign * (rotate by eta) (reflect if flip) x.
struct GroupElement {
  int sign = 1;
  int eta = 0;
  bool flip = false;
};

std::vector<GroupElement> group_elements(const SymmetryGroup& g);

// Channel index map of an element on a bank with J scales and Q angles.
int act_channel(const GroupElement& g, int channel, int J, int Q);
VertexClass act(const GroupElement& g, const VertexClass& v, int J, int Q);
// Rotations only act on edges at zero offset; a reflection flips the second offset.
Edge act(const GroupElement& g, const Edge& e, int J, int Q);

enum class PairPolicy { full, restricted };

struct OptimizerSettings {
  double eps_rel = 1e-3;
  int max_iter = 5000;
  int memory = 10;
  double c1 = 1e-4;
  double c2 = 0.9;
  double gtol = 1e-8;
  bool gamma_scaling = true;  // false: H0 = (s^T y)^{-1} I
  int restarts = 10;
  std::uint64_t seed = 0;
};

struct ModelSpec {
  std::string name = "custom";
  int J = 5;
  int Q = 16;
  int k_min = 1;
  int k_max = 1;
  int dn = 2;
  int dj = 0;
  int dl = 0;
  // Spatial offsets are attached to same-channel pairs with k = k' <= spatial_k_max.
  int spatial_k_max = 1;
  PairPolicy policy = PairPolicy::full;
  bool lowpass = true;
  SymmetryGroup group;
  OptimizerSettings opt;
};

// Presets "A".."D" with the neighbourhood parameters of the four foveal models.
ModelSpec model_preset(const std::string& name, int J, int Q);

struct EdgeSet {
  std::vector<Edge> edges;  // sorted, Hermitian complete
  int dn = 0;
  int dj = 0;
  int dl = 0;
  std::vector<std::pair<int, int>> kpairs;  // allowed (k, k') on a same scale
  std::vector<std::pair<int, int>> cross_kpairs;  // (k at j, k' at j' > j)

  std::size_t size() const { return edges.size(); }
  std::vector<VertexClass> classes() const;
};

int angular_distance(int l, int lp, int Q);

EdgeSet build_foveal_edges(const ModelSpec& spec);

// Number of orbits of the edge set under the non-translation elements of the group,
// i.e. the size of the sufficient statistics set once translations are quotiented.
std::size_t sufficient_statistics_count(const EdgeSet& edges, const ModelSpec& spec);

}  // namespace wph
