#include <set>

#include "doctest.h"
#include "wph/error.hpp"
#include "wph/graph.hpp"

using namespace wph;

TEST_CASE("diagonal-only edge set") {
  ModelSpec s;
  s.J = 3;
  s.Q = 4;
  s.k_min = s.k_max = 1;
  s.dn = s.dj = s.dl = 0;
  s.lowpass = false;
  EdgeSet e = build_foveal_edges(s);
  CHECK(e.size() == 12u);
  for (const auto& x : e.edges) {
    CHECK(x.a == x.b);
    CHECK(x.tau == Offset{});
  }
  s.lowpass = true;
  CHECK(build_foveal_edges(s).size() == 13u);
}

TEST_CASE("edge set invariants") {
  for (const char* name : {"A", "B", "C", "D"}) {
    ModelSpec s = model_preset(name, 4, 8);
    s.group.sign_change = true;
    EdgeSet e = build_foveal_edges(s);
    std::set<Edge> all(e.edges.begin(), e.edges.end());
    CHECK(all.size() == e.size());
    for (const auto& x : e.edges) {
      CHECK(all.count(hermitian_partner(x)) == 1);
      CHECK(std::max(std::abs(x.tau.n1), std::abs(x.tau.n2)) <= s.dn);
      CHECK((x.a.k + x.b.k) % 2 == 0);
      if (x.a.channel != s.J * s.Q && x.b.channel != s.J * s.Q) {
        CHECK(std::abs(x.a.channel / s.Q - x.b.channel / s.Q) <= s.dj);
        CHECK(angular_distance(x.a.channel % s.Q, x.b.channel % s.Q, s.Q) <= s.dl);
      } else {
        CHECK(x.a == x.b);
      }
    }
    for (const auto& v : e.classes()) CHECK(all.count({v, v, {0, 0}}) == 1);
  }
}

TEST_CASE("model D keeps only zero offsets") {
  EdgeSet e = build_foveal_edges(model_preset("D", 5, 16));
  for (const auto& x : e.edges) CHECK(x.tau == Offset{});
}

TEST_CASE("model C pair policy") {
  ModelSpec s = model_preset("C", 3, 8);
  EdgeSet e = build_foveal_edges(s);
  for (const auto& x : e.edges) {
    if (x.a.channel == s.J * s.Q) continue;
    const int j = x.a.channel / s.Q, jp = x.b.channel / s.Q;
    if (jp > j) {
      CHECK(((x.a.k == 0) || (x.a.k == 1 && x.b.k >= 1)));
    }
  }
}

TEST_CASE("invalid neighbourhoods") {
  ModelSpec s = model_preset("B", 3, 8);
  s.dl = 5;
  CHECK_THROWS_AS(build_foveal_edges(s), ConfigError);
  s = model_preset("B", 3, 8);
  s.k_min = 2;
  s.k_max = 3;
  CHECK_THROWS_AS(build_foveal_edges(s), ConfigError);
  CHECK_THROWS_AS(model_preset("E", 3, 8), ConfigError);
}

TEST_CASE("group elements and channel maps") {
  SymmetryGroup g{true, true, true, 8};
  auto el = group_elements(g);
  CHECK(el.size() == 32u);
  CHECK(g.order() == 32);
  for (const auto& x : el) {
    std::set<int> image;
    for (int c = 0; c < 3 * 8 + 1; ++c) image.insert(act_channel(x, c, 3, 8));
    CHECK(image.size() == 25u);
    CHECK(act_channel(x, 24, 3, 8) == 24);
  }
  GroupElement flip{1, 0, true};
  Edge e{{1, 1}, {2, 1}, {1, 2}};
  Edge f = act(flip, e, 3, 8);
  CHECK(f.a.channel == 7);
  CHECK(f.b.channel == 6);
  CHECK(f.tau == Offset{1, -2});
  CHECK_THROWS_AS(act(GroupElement{1, 1, false}, e, 3, 8), ConfigError);
}

TEST_CASE("model D statistics count") {
  const int J = 5, Q = 16;
  ModelSpec s = model_preset("D", J, Q);
  EdgeSet e = build_foveal_edges(s);
  const double ratio = double(sufficient_statistics_count(e, s)) / (256.0 * 256.0);
  CHECK(ratio == doctest::Approx(1.2e-2).epsilon(0.05));
  // Without rotations the orbit count is the raw edge count.
  ModelSpec a = model_preset("A", J, Q);
  EdgeSet ea = build_foveal_edges(a);
  CHECK(sufficient_statistics_count(ea, a) == ea.size());
}
