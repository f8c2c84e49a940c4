#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace wph {

struct LbfgsOptions {
  int memory = 10;
  double c1 = 1e-4;
  double c2 = 0.9;
  double gtol = 1e-8;  // on the max-norm of the gradient
  int max_iter = 5000;
  bool gamma_scaling = true;  // H0 = (s.y / y.y) I, otherwise (s.y)^{-1} I
  double f_target = -std::numeric_limits<double>::infinity();
  int max_line_search = 40;
};

enum class LbfgsStatus { gtol, f_target, max_iter, line_search_failure, non_finite };

const char* to_string(LbfgsStatus s);

struct LbfgsResult {
  std::vector<double> x;
  double f = 0;
  int iterations = 0;
  int evaluations = 0;
  int armijo_fallbacks = 0;
  LbfgsStatus status = LbfgsStatus::max_iter;
  std::vector<double> losses;  // f at x0 and after every accepted step
};

// Returns f(x) and writes the gradient. +inf marks an infeasible point; the gradient
// is then ignored.
using ObjectiveFn = std::function<double(const std::vector<double>& x, std::vector<double>& g)>;
using IterationHook = std::function<void(int iter, const std::vector<double>& x, double f)>;

LbfgsResult lbfgs_minimize(const ObjectiveFn& fn, std::vector<double> x0, const LbfgsOptions& opt,
                           const IterationHook& hook = {});

}  // namespace wph
