#include "wph/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "wph/error.hpp"

namespace wph {

using json = nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
}

template <class T>
void take(const json& j, const char* key, T& dst, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    dst = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

void take_seed(const json& j, const char* key, std::uint64_t& dst, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if (!it->is_number_unsigned()) throw ConfigError(where + "." + key + ": expected an unsigned integer");
  dst = it->get<std::uint64_t>();
}

ModelSpec model_from(const json& j) {
  const std::string w = "model";
  check_keys(j,
             {"preset", "name", "J", "Q", "k_min", "k_max", "dn", "dj", "dl", "spatial_k_max", "policy",
              "lowpass", "group", "optimizer"},
             w);
  int J = 5, Q = 16;
  take(j, "J", J, w);
  take(j, "Q", Q, w);
  ModelSpec m;
  m.J = J;
  m.Q = Q;
  if (j.contains("preset")) {
    std::string p;
    take(j, "preset", p, w);
    m = model_preset(p, J, Q);
  }
  take(j, "name", m.name, w);
  take(j, "k_min", m.k_min, w);
  take(j, "k_max", m.k_max, w);
  take(j, "dn", m.dn, w);
  take(j, "dj", m.dj, w);
  take(j, "dl", m.dl, w);
  take(j, "spatial_k_max", m.spatial_k_max, w);
  take(j, "lowpass", m.lowpass, w);
  if (j.contains("policy")) {
    std::string p;
    take(j, "policy", p, w);
    if (p == "full")
      m.policy = PairPolicy::full;
    else if (p == "restricted")
      m.policy = PairPolicy::restricted;
    else
      throw ConfigError("model.policy: expected 'full' or 'restricted'");
  }
  if (j.contains("group")) {
    const json& g = j["group"];
    check_keys(g, {"rotations", "reflection", "sign_change"}, "model.group");
    take(g, "rotations", m.group.rotations, "model.group");
    take(g, "reflection", m.group.reflection, "model.group");
    take(g, "sign_change", m.group.sign_change, "model.group");
  }
  m.group.Q = m.Q;
  if (j.contains("optimizer")) {
    const json& o = j["optimizer"];
    const std::string ow = "model.optimizer";
    check_keys(o, {"eps_rel", "max_iter", "memory", "c1", "c2", "gtol", "gamma_scaling"}, ow);
    take(o, "eps_rel", m.opt.eps_rel, ow);
    take(o, "max_iter", m.opt.max_iter, ow);
    take(o, "memory", m.opt.memory, ow);
    take(o, "c1", m.opt.c1, ow);
    take(o, "c2", m.opt.c2, ow);
    take(o, "gtol", m.opt.gtol, ow);
    take(o, "gamma_scaling", m.opt.gamma_scaling, ow);
    if (!(m.opt.c1 > 0 && m.opt.c1 < m.opt.c2 && m.opt.c2 < 1))
      throw ConfigError("model.optimizer: need 0 < c1 < c2 < 1");
    if (m.opt.memory < 1 || m.opt.max_iter < 1) throw ConfigError("model.optimizer: bad memory or max_iter");
  }
  if (m.J < 1 || m.Q < 2 || m.Q % 2) throw ConfigError("model: need J >= 1 and even Q >= 2");
  if (m.k_min < 0 || m.k_min > m.k_max) throw ConfigError("model: bad k range");
  if (m.dn < 0 || m.dj < 0 || m.dl < 0) throw ConfigError("model: negative neighbourhood");
  return m;
}

json model_to(const ModelSpec& m) {
  return json{{"name", m.name},
              {"J", m.J},
              {"Q", m.Q},
              {"k_min", m.k_min},
              {"k_max", m.k_max},
              {"dn", m.dn},
              {"dj", m.dj},
              {"dl", m.dl},
              {"spatial_k_max", m.spatial_k_max},
              {"policy", m.policy == PairPolicy::full ? "full" : "restricted"},
              {"lowpass", m.lowpass},
              {"group",
               {{"rotations", m.group.rotations},
                {"reflection", m.group.reflection},
                {"sign_change", m.group.sign_change}}},
              {"optimizer",
               {{"eps_rel", m.opt.eps_rel},
                {"max_iter", m.opt.max_iter},
                {"memory", m.opt.memory},
                {"c1", m.opt.c1},
                {"c2", m.opt.c2},
                {"gtol", m.opt.gtol},
                {"gamma_scaling", m.opt.gamma_scaling}}}};
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json j = parse(json_text);
  check_keys(j,
             {"model", "seed", "restarts", "threads", "input", "reference", "samples", "out", "eval",
              "gauss", "gauss_test"},
             "config");
  RunConfig c;
  if (j.contains("model")) c.model = model_from(j["model"]);
  take_seed(j, "seed", c.seed, "config");
  c.model.opt.seed = c.seed;
  take(j, "restarts", c.restarts, "config");
  take(j, "threads", c.threads, "config");
  take(j, "input", c.input, "config");
  take(j, "reference", c.reference, "config");
  take(j, "samples", c.samples, "config");
  take(j, "out", c.out, "config");
  if (j.contains("eval")) {
    const json& e = j["eval"];
    const std::string w = "eval";
    check_keys(e,
               {"k_min", "k_max", "dn", "lowpass", "profile_k", "profile_j", "profile_a_max", "structure_j",
                "structure_q"},
               w);
    take(e, "k_min", c.eval.window.k_min, w);
    take(e, "k_max", c.eval.window.k_max, w);
    take(e, "dn", c.eval.window.dn, w);
    take(e, "lowpass", c.eval.window.lowpass, w);
    take(e, "profile_k", c.eval.profile_k, w);
    take(e, "profile_j", c.eval.profile_j, w);
    take(e, "profile_a_max", c.eval.profile_a_max, w);
    take(e, "structure_j", c.eval.structure_j, w);
    take(e, "structure_q", c.eval.structure_q, w);
  }
  if (j.contains("gauss")) {
    const json& g = j["gauss"];
    check_keys(g, {"gtol", "max_iter", "samples"}, "gauss");
    take(g, "gtol", c.gauss.gtol, "gauss");
    take(g, "max_iter", c.gauss.max_iter, "gauss");
    take(g, "samples", c.gauss.samples, "gauss");
  }
  if (j.contains("gauss_test")) {
    const json& g = j["gauss_test"];
    check_keys(g, {"ratio_threshold", "z_threshold"}, "gauss_test");
    take(g, "ratio_threshold", c.gauss_test.ratio_threshold, "gauss_test");
    take(g, "z_threshold", c.gauss_test.z_threshold, "gauss_test");
  }
  c.model.opt.restarts = c.restarts;
  if (c.restarts < 1) throw ConfigError("config.restarts must be >= 1");
  if (c.threads < 1) throw ConfigError("config.threads must be >= 1");
  if (c.gauss.samples < 1) throw ConfigError("gauss.samples must be >= 1");
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string to_json(const RunConfig& c) {
  json j{{"model", model_to(c.model)},
         {"seed", c.seed},
         {"restarts", c.restarts},
         {"threads", c.threads},
         {"input", c.input},
         {"reference", c.reference},
         {"samples", c.samples},
         {"out", c.out},
         {"eval",
          {{"k_min", c.eval.window.k_min},
           {"k_max", c.eval.window.k_max},
           {"dn", c.eval.window.dn},
           {"lowpass", c.eval.window.lowpass},
           {"profile_k", c.eval.profile_k},
           {"profile_j", c.eval.profile_j},
           {"profile_a_max", c.eval.profile_a_max},
           {"structure_j", c.eval.structure_j},
           {"structure_q", c.eval.structure_q}}},
         {"gauss", {{"gtol", c.gauss.gtol}, {"max_iter", c.gauss.max_iter}, {"samples", c.gauss.samples}}},
         {"gauss_test",
          {{"ratio_threshold", c.gauss_test.ratio_threshold}, {"z_threshold", c.gauss_test.z_threshold}}}};
  return j.dump(2);
}

ModelSpec parse_model_spec(const std::string& json_text) { return model_from(parse(json_text)); }

std::string to_json(const ModelSpec& m) { return model_to(m).dump(2); }

}  // namespace wph
