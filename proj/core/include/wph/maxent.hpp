#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wph/covariance.hpp"
#include "wph/graph.hpp"
#include "wph/grid.hpp"
#include "wph/lbfgs.hpp"
#include "wph/wavelet.hpp"

namespace wph {

// Maximum entropy Gaussian model under wavelet covariance constraints
// K_e = (1/d) sum_w P(w) psi_a(w) psi_b(w) e^{-i w.delta_e}. The Lagrangian is taken over
// spectra with P(w) = P(-w), so every multiplier sees the symmetrized kernel and samples
// are real fields.
struct GaussianDualProblem {
  int side = 0;
  struct Param {
    Edge edge;       // canonical member of its Hermitian pair
    int fa = 0, fb = 0;  // filter indices
    int d1 = 0, d2 = 0;  // pixel offset
    cplx target;
    bool self = false;
    double scale = 1;  // beta = theta * scale
    // Symmetrized kernel 1/2 (psi_a psi_b(w) e^{-i w.delta} + psi_a psi_b(-w) e^{i w.delta})
    // on the bins where it is nonzero.
    std::vector<int> bins;
    std::vector<cplx> phi;
  };
  std::vector<Param> params;

  std::size_t n_real() const;  // optimisation dimension
};

GaussianDualProblem make_dual_problem(int side, const std::vector<std::vector<double>>& filters,
                                      const std::vector<int>& strides, const std::vector<Edge>& edges,
                                      const std::vector<cplx>& targets);
GaussianDualProblem make_dual_problem(const CovarianceTable& targets, const WaveletBank& bank);
// k = 1 constraints of the model's edge set taken from the averaged periodogram of the
// centred fields, i.e. full-resolution translation averages. Unlike lattice estimates
// these are always achievable by a stationary Gaussian field.
GaussianDualProblem make_dual_problem(const std::vector<Field>& xs, const WaveletBank& bank,
                                      const ModelSpec& spec);
std::vector<double> averaged_periodogram(const std::vector<Field>& xs);

struct GaussianDualState {
  std::vector<cplx> betas;      // one per problem param
  std::vector<double> spectrum;  // P(w), FFT bin order
  double H = 0;                  // dual value
  bool feasible = false;
  bool converged = false;
  int iterations = 0;
  double grad_max = 0;
  double misfit = 0;  // max |K_model - target| / sqrt(D_a D_b); large when the targets are not achievable
  LbfgsStatus status = LbfgsStatus::max_iter;
  std::vector<double> history;  // dual value per accepted iterate
};

// Dual value H(beta) = 1/2 sum_E beta_e d T_e + 1/2 sum_w log P(w) + d/2 log 2 pi with
// P = 1 / Lambda; +inf when Lambda(w) <= 0 somewhere. grad (optional) receives
// dH/dRe(beta) + i dH/dIm(beta) per param (real part only for self edges).
double dual_objective(const GaussianDualProblem& prob, const std::vector<cplx>& betas,
                      std::vector<cplx>* grad = nullptr, std::vector<double>* spectrum = nullptr);

// L-BFGS for at most max_iter steps, then damped Newton steps if the gradient is still above gtol.
GaussianDualState fit_gaussian_model(const GaussianDualProblem& prob, double gtol = 1e-7,
                                     int max_iter = 2000, const LbfgsOptions& base = {});

// (1/d) sum_w P(w) psi_a psi_b e^{-i w.delta} per param.
std::vector<cplx> model_covariances(const GaussianDualProblem& prob, const std::vector<double>& spectrum);

// x = IDFT(sqrt(P) DFT(w)) with w unit white noise.
std::vector<Field> sample_gaussian(const std::vector<double>& spectrum, int side, std::uint64_t seed,
                                   int count);
std::vector<Field> sample_gaussian(const GaussianDualState& state, int side, std::uint64_t seed,
                                   int count);

}  // namespace wph
