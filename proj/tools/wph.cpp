#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wph/config.hpp"
#include "wph/covariance.hpp"
#include "wph/error.hpp"
#include "wph/evaluation.hpp"
#include "wph/fourier_stats.hpp"
#include "wph/io.hpp"
#include "wph/maxent.hpp"
#include "wph/synthesis.hpp"

namespace fs = std::filesystem;
using namespace wph;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> restarts;
  std::optional<int> threads;
};

RunConfig resolve(const Overrides& o) {
  RunConfig c = o.config.empty() ? parse_run_config("{}") : load_run_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.out = *o.out;
  if (o.restarts) {
    if (*o.restarts < 1) throw ConfigError("--restarts must be at least 1");
    c.restarts = *o.restarts;
  }
  if (o.threads) {
    if (*o.threads < 1) throw ConfigError("--threads must be at least 1");
    c.threads = *o.threads;
  }
  return c;
}

std::string pick(const std::string& arg, const std::string& fallback, const char* what) {
  if (!arg.empty()) return arg;
  if (!fallback.empty()) return fallback;
  throw ConfigError(std::string("no ") + what + " given");
}

std::vector<Field> load_fields(const std::string& path) {
  if (fs::is_directory(path)) return read_field_dir(path);
  return {read_field(path)};
}

std::string output_dir(const RunConfig& c) {
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec) throw IoError("cannot create " + c.out + ": " + ec.message());
  return c.out;
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

std::string numbered(const std::string& stem, std::size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03zu.phk", stem.c_str(), i);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed for " + path);
}

std::shared_ptr<const WaveletBank> bank_for(const ModelSpec& m, int side) {
  if (side < (1 << m.J)) throw ConfigError("field side is smaller than 2^J");
  return std::make_shared<const WaveletBank>(build_bump_bank(side, m.J, m.Q));
}

GaussianDualState fit_checked(const std::vector<Field>& xs, const WaveletBank& bank, const RunConfig& c) {
  auto st = fit_gaussian_model(make_dual_problem(xs, bank, c.model), c.gauss.gtol, c.gauss.max_iter);
  std::printf("gaussian fit: H=%.10g iterations=%d status=%s misfit=%.3g\n", st.H, st.iterations,
              to_string(st.status), st.misfit);
  if (!st.feasible) throw NumericalError("gaussian dual did not reach a feasible spectrum");
  return st;
}

int cmd_cov(const RunConfig& c, const std::string& in) {
  const auto xs = load_fields(pick(in, c.input, "input field"));
  auto bank = bank_for(c.model, xs.front().side);
  EdgeSet es = build_foveal_edges(c.model);
  if (es.edges.empty()) throw ConfigError("model has an empty edge set");
  auto t = xs.size() == 1 ? estimate_covariance(xs.front(), *bank, es, c.model.group)
                          : estimate_covariance(xs, *bank, es, c.model.group);
  t.source = in.empty() ? c.input : in;
  const auto tn = normalize_correlations(t, t.own_diagonal());
  const auto dir = output_dir(c);
  write_table(join(dir, "cov.phkt"), t);
  write_table(join(dir, "corr.phkt"), tn);
  write_table_csv(join(dir, "cov.csv"), t, *bank);
  const double d = static_cast<double>(bank->side) * bank->side;
  const std::size_t stats = sufficient_statistics_count(es, c.model);
  std::printf("model %s J=%d Q=%d side=%d\n", c.model.name.c_str(), c.model.J, c.model.Q, bank->side);
  std::printf("classes %zu edges %zu sufficient statistics %zu |E_G|/d %.4g\n", t.classes.size(),
              t.edges.size(), stats, stats / d);
  return 0;
}

int cmd_synth(const RunConfig& c, const std::string& in) {
  const auto xs = load_fields(pick(in, c.input, "reference field"));
  const Field& ref = xs.front();
  auto bank = bank_for(c.model, ref.side);
  const auto dir = output_dir(c);
  nlohmann::json summary;
  summary["model"] = c.model.name;
  summary["seed"] = c.seed;
  if (c.model.name == "A") {
    auto st = fit_checked(xs, *bank, c);
    write_spectrum(join(dir, "spectrum.phk"), st.spectrum, ref.side);
    auto samples = sample_gaussian(st, ref.side, c.seed, c.restarts);
    for (std::size_t i = 0; i < samples.size(); ++i) write_field(join(dir, numbered("sample", i)), samples[i]);
    summary["route"] = "gaussian";
    summary["misfit"] = st.misfit;
    summary["best"] = 0;
    write_text(join(dir, "synth.json"), summary.dump(2) + "\n");
    std::printf("wrote %zu samples to %s\n", samples.size(), dir.c_str());
    return 0;
  }
  auto res = synthesize(ref, c.model, bank, c.restarts, c.seed, c.threads);
  std::vector<std::vector<double>> losses;
  nlohmann::json runs = nlohmann::json::array();
  for (std::size_t i = 0; i < res.runs.size(); ++i) {
    const auto& r = res.runs[i];
    write_field(join(dir, numbered("sample", i)), r.sample);
    losses.push_back(r.losses);
    runs.push_back({{"seed", r.seed},
                    {"initial_loss", r.initial_loss},
                    {"final_loss", r.final_loss},
                    {"iterations", r.iterations},
                    {"armijo_fallbacks", r.armijo_fallbacks},
                    {"status", to_string(r.status)},
                    {"success", r.success},
                    {"diagnostic", r.diagnostic}});
    std::printf("restart %zu: loss %.6g -> %.6g after %d iterations (%s)%s%s\n", i, r.initial_loss,
                r.final_loss, r.iterations, to_string(r.status), r.success ? " ok" : "",
                static_cast<int>(i) == res.best ? " best" : "");
    if (!r.diagnostic.empty() && r.diagnostic != to_string(r.status)) std::printf("  %s\n", r.diagnostic.c_str());
  }
  write_loss_csv(join(dir, "loss.csv"), losses);
  summary["route"] = "microcanonical";
  summary["best"] = res.best;
  summary["runs"] = runs;
  write_text(join(dir, "synth.json"), summary.dump(2) + "\n");
  if (res.best < 0) throw NumericalError("no restart produced a finite loss");
  return 0;
}

int cmd_gauss_fit(const RunConfig& c, const std::string& in) {
  const auto xs = load_fields(pick(in, c.input, "input field"));
  auto bank = bank_for(c.model, xs.front().side);
  auto st = fit_checked(xs, *bank, c);
  const auto dir = output_dir(c);
  write_spectrum(join(dir, "spectrum.phk"), st.spectrum, bank->side);
  nlohmann::json j{{"H", st.H},
                   {"iterations", st.iterations},
                   {"converged", st.converged},
                   {"status", to_string(st.status)},
                   {"grad_max", st.grad_max},
                   {"misfit", st.misfit}};
  write_text(join(dir, "gauss_fit.json"), j.dump(2) + "\n");
  return 0;
}

// --restarts doubles as the sample count; otherwise gauss.samples applies.
int cmd_gauss_sample(const RunConfig& c, const std::string& in, bool count_flag) {
  int side = 0;
  const auto P = read_spectrum(pick(in, "", "spectrum file"), &side);
  const int count = count_flag ? c.restarts : c.gauss.samples;
  auto xs = sample_gaussian(P, side, c.seed, count);
  const auto dir = output_dir(c);
  for (std::size_t i = 0; i < xs.size(); ++i) write_field(join(dir, numbered("sample", i)), xs[i]);
  std::printf("wrote %zu samples to %s\n", xs.size(), dir.c_str());
  return 0;
}

int cmd_eval(const RunConfig& c, const std::string& ref_in, const std::string& model_in) {
  const auto ref = load_fields(pick(ref_in, c.reference, "reference directory"));
  const auto model = load_fields(pick(model_in, c.samples, "model sample directory"));
  const int side = ref.front().side;
  if (model.front().side != side) throw ConfigError("reference and model grids differ");
  auto bank = bank_for(c.model, side);
  const EvalWindow win = make_eval_window(c.model.J, c.model.Q, c.eval.window);
  const WindowMatrix Kr = estimate_window(ref, *bank, win);
  const WindowMatrix Cr = normalize_window(Kr, win, Kr.diag);
  std::vector<ErrorReport> rows;
  // Model-side statistics pool every sample; the empirical error is per reference realization.
  const double model_err = correlation_error(Cr, normalize_window(estimate_window(model, *bank, win), win, Kr.diag));
  rows.push_back(summarize("eps_model", 0, 0, {model_err}));
  if (ref.size() > 1) {
    std::vector<double> emp;
    for (const auto& x : ref)
      emp.push_back(correlation_error(Cr, normalize_window(estimate_window({x}, *bank, win), win, Kr.diag)));
    rows.push_back(summarize("eps_emp", 0, 0, emp));
  }
  for (int j : c.eval.structure_j)
    for (double q : c.eval.structure_q) rows.push_back(structure_error(ref, model, j, q));
  const auto dir = output_dir(c);
  write_report_csv(join(dir, "errors.csv"), rows);
  std::vector<ProfilePoint> pr, pm;
  for (int k : c.eval.profile_k) {
    for (auto& p : long_range_profile(ref, *bank, k, c.eval.profile_j, c.eval.profile_a_max)) pr.push_back(p);
    for (auto& p : long_range_profile(model, *bank, k, c.eval.profile_j, c.eval.profile_a_max)) pm.push_back(p);
  }
  write_profile_csv(join(dir, "profile_reference.csv"), pr);
  write_profile_csv(join(dir, "profile_model.csv"), pm);
  for (const auto& r : rows)
    std::printf("%-10s j=%d q=%g mean=%.6g std=%.3g\n", r.metric.c_str(), r.j, r.q, r.mean, r.std);
  return 0;
}

int cmd_gauss_test(const RunConfig& c, const std::string& in) {
  const auto xs = load_fields(pick(in, c.input, "input field"));
  auto bank = bank_for(c.model, xs.front().side);
  GaussianityAccumulator acc(*bank, c.gauss_test.ratio_threshold, c.gauss_test.z_threshold);
  for (const auto& x : xs) acc.add(x);
  const auto r = acc.report();
  std::fputs(describe(r, *bank).c_str(), stdout);
  return 0;
}

int cmd_spectrum(const RunConfig& c, const std::string& in) {
  const auto xs = load_fields(pick(in, c.input, "input field"));
  std::vector<Field> hats;
  for (const auto& x : xs) hats.push_back(dft2(x));
  const auto rs = radial_power_spectrum(hats);
  const auto dir = output_dir(c);
  const auto path = join(dir, "spectrum.csv");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "radius,log10_power,count\n";
  for (std::size_t i = 0; i < rs.radius.size(); ++i)
    out << format_double(rs.radius[i]) << ',' << format_double(rs.log_power[i]) << ',' << rs.count[i] << '\n';
  if (!out) throw IoError("write failed for " + path);
  return 0;
}

int cmd_export(const RunConfig& c, const std::string& in) {
  const auto src = pick(in, c.input, "field file");
  const Field x = read_field(src);
  const auto dir = output_dir(c);
  const auto path = join(dir, fs::path(src).stem().string() + ".pgm");
  auto r = export_pgm(x, path);
  std::printf("%s min=%.17g max=%.17g\n", path.c_str(), r.min, r.max);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wavelet phase harmonic statistics and texture models"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--config", o.config, "RunConfig JSON file");
  app.add_option("--seed", o.seed, "base seed");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--restarts", o.restarts, "restarts or sample count");
  app.add_option("--threads", o.threads, "worker threads");

  std::string in, in2;
  auto* cov = app.add_subcommand("cov", "estimate means and covariances on the model edge set");
  cov->add_option("input", in, "field file or directory");
  auto* synth = app.add_subcommand("synth", "synthesize samples from a reference field");
  synth->add_option("reference", in, "reference field");
  auto* gfit = app.add_subcommand("gauss-fit", "fit the maximum entropy Gaussian model");
  gfit->add_option("input", in, "field file or directory");
  auto* gsample = app.add_subcommand("gauss-sample", "sample a fitted Gaussian spectrum");
  gsample->add_option("spectrum", in, "spectrum file");
  auto* eval = app.add_subcommand("eval", "compare model samples with a reference ensemble");
  eval->add_option("reference", in, "reference field or directory");
  eval->add_option("samples", in2, "model field or directory");
  auto* gtest = app.add_subcommand("gauss-test", "sparsity ratio and disjoint-support test");
  gtest->add_option("input", in, "field file or directory");
  auto* spec = app.add_subcommand("spectrum", "radial log power spectrum");
  spec->add_option("input", in, "field file or directory");
  auto* exp = app.add_subcommand("export", "write a 16-bit PGM with a range sidecar");
  exp->add_option("field", in, "field file");
  for (auto* s : app.get_subcommands({})) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const RunConfig c = resolve(o);
    if (*cov) return cmd_cov(c, in);
    if (*synth) return cmd_synth(c, in);
    if (*gfit) return cmd_gauss_fit(c, in);
    if (*gsample) return cmd_gauss_sample(c, in, o.restarts.has_value());
    if (*eval) return cmd_eval(c, in, in2);
    if (*gtest) return cmd_gauss_test(c, in);
    if (*spec) return cmd_spectrum(c, in);
    if (*exp) return cmd_export(c, in);
  } catch (const Error& e) {
    std::fprintf(stderr, "wph: %s\n", e.what());
    return e.exit_code();
  } catch (const std::bad_alloc&) {
    std::fprintf(stderr, "wph: out of memory\n");
    return 3;
  }
  return 2;
}
