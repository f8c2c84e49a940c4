#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "wph/covariance.hpp"
#include "wph/graph.hpp"
#include "wph/grid.hpp"
#include "wph/lbfgs.hpp"
#include "wph/wavelet.hpp"

namespace wph {

// Reference statistics of x_bar on the model's edge set. Correlations are normalized by
// the reference diagonal D, which stays frozen during optimisation; the candidate's
// covariances are centred on the reference means.
struct SynthesisTarget {
  ModelSpec spec;
  std::shared_ptr<const WaveletBank> bank;
  std::shared_ptr<const MomentPlan> plan;
  std::vector<cplx> mean;    // per plan class
  std::vector<cplx> corr;    // per plan edge
  std::vector<double> diag;  // per plan class
  double sigma2 = 0;
};

SynthesisTarget make_target(const Field& reference, const ModelSpec& spec,
                            std::shared_ptr<const WaveletBank> bank);

class MicrocanonicalObjective {
 public:
  explicit MicrocanonicalObjective(const SynthesisTarget& target) : t_(target) {}
  double value(const Field& x) const;
  // Real gradient 2 Re(W* dL/dz_bar) of a real field stored as doubles.
  double value_and_gradient(const std::vector<double>& x, std::vector<double>& grad) const;

 private:
  const SynthesisTarget& t_;
};

double objective(const Field& x, const SynthesisTarget& target);
Field objective_gradient(const Field& x, const SynthesisTarget& target);

std::vector<double> to_real_vector(const Field& x);
Field from_real_vector(const std::vector<double>& v, int side);

// L-BFGS from x0 with the target's optimiser settings; eps_abs stops once f <= eps_abs.
LbfgsResult run_microcanonical(const SynthesisTarget& target, const Field& x0, double eps_abs,
                               const IterationHook& hook = {});

struct RestartResult {
  Field sample;
  std::uint64_t seed = 0;
  double initial_loss = 0;
  double final_loss = 0;
  int iterations = 0;
  int armijo_fallbacks = 0;
  LbfgsStatus status = LbfgsStatus::max_iter;
  bool success = false;  // final loss below eps_rel * initial loss
  std::vector<double> losses;
  std::string diagnostic;
};

struct SynthesisResult {
  std::vector<RestartResult> runs;
  int best = -1;
};

SynthesisResult synthesize(const SynthesisTarget& target, int restarts, std::uint64_t seed,
                           int threads = 1);
SynthesisResult synthesize(const Field& reference, const ModelSpec& spec,
                           std::shared_ptr<const WaveletBank> bank, int restarts, std::uint64_t seed,
                           int threads = 1);

}  // namespace wph
