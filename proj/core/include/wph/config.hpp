#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wph/evaluation.hpp"
#include "wph/graph.hpp"

namespace wph {

struct EvalSettings {
  EvalWindowSpec window;
  std::vector<int> profile_k = {0, 1};
  int profile_j = 1;
  int profile_a_max = 4;
  std::vector<int> structure_j = {1, 2, 3};
  std::vector<double> structure_q = {1, 2, 3, 4};
};

struct GaussSettings {
  double gtol = 1e-7;
  int max_iter = 2000;
  int samples = 1;
};

struct GaussTestSettings {
  double ratio_threshold = 0.05;
  double z_threshold = 5.0;
};

// Run description. Every key is optional; unknown keys are rejected.
struct RunConfig {
  ModelSpec model = model_preset("B", 5, 16);
  std::uint64_t seed = 0;
  int restarts = 10;
  int threads = 1;
  std::string input;
  std::string reference;
  std::string samples;
  std::string out = ".";
  EvalSettings eval;
  GaussSettings gauss;
  GaussTestSettings gauss_test;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);
std::string to_json(const RunConfig& c);

ModelSpec parse_model_spec(const std::string& json_text);
std::string to_json(const ModelSpec& m);

}  // namespace wph
