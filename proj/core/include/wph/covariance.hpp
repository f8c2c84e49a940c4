#pragma once

#include <map>
#include <string>
#include <vector>

#include "wph/graph.hpp"
#include "wph/grid.hpp"
#include "wph/wavelet.hpp"

namespace wph {

struct CovarianceTable {
  int side = 0;
  int J = 0;
  int Q = 0;
  SymmetryGroup group;
  std::string source;
  std::vector<VertexClass> classes;  // sorted
  std::vector<cplx> mean;
  std::vector<Edge> edges;  // sorted
  std::vector<cplx> cov;
  bool normalized = false;
  std::vector<double> diag;  // normalizer per class when normalized

  int class_index(const VertexClass& v) const;  // -1 if absent
  int edge_index(const Edge& e) const;          // -1 if absent
  cplx value(const Edge& e) const;
  // Real diagonal K(v, v, 0) for every class; throws if a diagonal edge is missing.
  std::vector<double> own_diagonal() const;
};

// Raw translation-averaged moments and their symmetry averages for a fixed edge list.
// Raw means m(v) = <F_v> and products P(a, b, tau) = <F_a(n) conj(F_b(n + tau))> run over
// the lattice of each channel (products over the coarser one); F_v = [x * psi_c]^k.
class MomentPlan {
 public:
  MomentPlan(const WaveletBank& bank, std::vector<Edge> edges, const SymmetryGroup& group);

  struct Raw {
    std::vector<cplx> m;
    std::vector<cplx> P;
  };

  const std::vector<VertexClass>& classes() const { return classes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<VertexClass>& raw_classes() const { return raw_classes_; }

  std::vector<std::vector<cplx>> harmonic_fields(const WaveletCoeffs& z) const;
  Raw raw_moments(const std::vector<std::vector<cplx>>& F) const;
  // Group averages: means per class of classes(), products per edge.
  std::vector<cplx> averaged_means(const Raw& raw) const;
  std::vector<cplx> averaged_products(const Raw& raw) const;

  // Pulls cotangents (derivatives with respect to the conjugate) of the averaged
  // means and products back to the harmonic fields. cotF is accumulated into.
  void backward(const std::vector<std::vector<cplx>>& F, const std::vector<cplx>& cot_mean,
                const std::vector<cplx>& cot_prod, std::vector<std::vector<cplx>>& cotF) const;
  // Cotangents on harmonic fields to cotangents on wavelet coefficients.
  WaveletCoeffs chain_to_coeffs(const WaveletCoeffs& z,
                                const std::vector<std::vector<cplx>>& cotF) const;

 private:
  struct RawEdge {
    int a, b;
    int t1, t2;
    int L, fa, fb, La, Lb;
  };
  struct Term {
    int raw;
    double sign;
  };
  int side_;
  int J_, Q_;
  std::vector<int> lattice_;  // per channel
  double inv_order_;
  std::vector<VertexClass> classes_;
  std::vector<Edge> edges_;
  std::vector<VertexClass> raw_classes_;
  std::vector<RawEdge> raw_edges_;
  std::vector<std::vector<Term>> mean_terms_;  // per class
  std::vector<std::vector<Term>> prod_terms_;  // per edge
};

std::vector<cplx> estimate_mean(const Field& x, const WaveletBank& bank,
                                const std::vector<VertexClass>& classes,
                                const SymmetryGroup& group);

// Single realization: orbit average over the translations of each lattice and the group.
CovarianceTable estimate_covariance(const Field& x, const WaveletBank& bank, const EdgeSet& edges,
                                    const SymmetryGroup& group);
// Ensemble: raw moments averaged over realizations before centering.
CovarianceTable estimate_covariance(const std::vector<Field>& xs, const WaveletBank& bank,
                                    const EdgeSet& edges, const SymmetryGroup& group);

// C(v, v') = K(v, v') / sqrt(D(v) D(v')), D indexed like table.classes.
CovarianceTable normalize_correlations(const CovarianceTable& table,
                                       const std::vector<double>& reference_diag);

struct ReducedEntry {
  int j, k, jp, kp, m;
  cplx value;
};

struct ReducedTable {
  std::vector<ReducedEntry> entries;  // m = m' only
  double total_energy = 0;
  double offdiag_energy = 0;  // energy of m != m' before truncation
  std::size_t unreduced_size = 0;
};

// Angular DFT of the zero-offset blocks K((j, l, k), (j', l', k')).
ReducedTable angular_fourier_reduce(const CovarianceTable& table);

}  // namespace wph
