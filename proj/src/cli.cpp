// Copyright 2026 The PANDA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "panda/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <nlohmann/json.hpp>
#include <ostream>
#include <random>
#include <sstream>

#include "panda/error.hpp"
#include "panda/experiment.hpp"
#include "panda/metrics.hpp"
#include "panda/nda.hpp"
#include "panda/parallel.hpp"
#include "panda/rng.hpp"
#include "panda/theory.hpp"
#include "panda/tns_io.hpp"
#include "panda/world.hpp"

namespace panda::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

// Flags that never influence numeric output and stay out of manifests.
bool IsVolatileFlag(const std::string& name) {
  return name == "--help" || name == "--out-dir" || name == "--threads";
}

Json ResolvedFlags(const CLI::App& app, Json& inputs) {
  Json flags = Json::object();
  for (const CLI::Option* opt : app.get_options()) {
    const std::string name = opt->get_name();
    if (IsVolatileFlag(name)) continue;
    if (opt->get_positional()) {
      for (const auto& v : opt->results()) inputs.push_back(v);
      continue;
    }
    if (opt->get_expected_min() == 0) {
      flags[name] = opt->count() > 0;
    } else if (opt->count() > 0) {
      flags[name] = opt->results().back();
    } else {
      flags[name] = opt->get_default_str();
    }
  }
  return flags;
}

class Manifest {
 public:
  Manifest(const CLI::App& app, std::uint64_t seed) : start_(Clock::now()) {
    json_["subcommand"] = app.get_name();
    json_["tool_version"] = kToolVersion;
    json_["seed"] = seed;
    Json inputs = Json::array();
    json_["flags"] = ResolvedFlags(app, inputs);
    json_["inputs"] = inputs;
    json_["outputs"] = Json::array();
  }

  void AddOutput(const fs::path& p) { json_["outputs"].push_back(p.filename().string()); }

  void Write(const fs::path& dir) {
    json_["wall_time_seconds"] =
        std::chrono::duration<double>(Clock::now() - start_).count();
    json_["threads"] = ThreadCount();
    io::WriteTextFile(dir / "manifest.json", json_.dump(2) + "\n");
  }

 private:
  Json json_;
  Clock::time_point start_;
};

void WriteOutput(const fs::path& path, const std::string& text, Manifest& manifest) {
  io::WriteTextFile(path, text);
  manifest.AddOutput(path);
}

std::vector<double> ParseNumbers(std::string_view text) {
  std::vector<double> out;
  for (const std::string& item : SplitList(text)) {
    double v = 0.0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (res.ec != std::errc() || res.ptr != item.data() + item.size()) {
      throw Error(ErrorCode::kParseError, "not a number: '" + item + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorCode::kParseError, "empty list");
  return out;
}

struct WorldFlags {
  world::WorldSpec spec;
  std::string world_dir;
  std::int64_t world_seed = -1;

  void Add(CLI::App* app, bool allow_dir) {
    if (allow_dir) {
      app->add_option("--world-dir", world_dir, "Load a world written by world-make");
    }
    app->add_option("--num-classes", spec.num_classes, "Number of classes");
    app->add_option("--image-size", spec.image_size, "Image height and width");
    app->add_option("--channels", spec.channels, "Image channels");
    app->add_option("--feature-dim", spec.feature_dim, "Encoder feature dimension");
    app->add_option("--corruption-strength", spec.corruption_strength, "Corruption scale");
    app->add_option("--spurious-align", spec.spurious_align,
                    "Cosine of the corruption axis with class 0's text direction");
    app->add_option("--patch-size", spec.patch_size, "NDA patch size");
    app->add_option("--num-domains", spec.num_domains, "Corrupted domains");
    app->add_option("--world-seed", world_seed, "World seed (-1: use --seed)");
  }

  world::World Build(std::uint64_t seed) const {
    if (!world_dir.empty()) return world::LoadWorld(world_dir);
    world::WorldSpec s = spec;
    s.seed = world_seed >= 0 ? static_cast<std::uint64_t>(world_seed) : seed;
    return world::MakeWorld(s);
  }
};

struct SimFlags {
  experiment::SimulateConfig config;
  std::string method = "tent_panda";
  std::string ablation = "full";
  std::string m = "auto";

  void Add(CLI::App* app) {
    auto& c = config;
    app->add_option("--method", method, "zero_shot | panda_only | tent | tent_panda");
    app->add_option("--stream-len", c.stream_len, "Samples in the test stream");
    app->add_option("--batch-size", c.batch_size, "Adaptation batch size");
    app->add_option("--chunk-size", c.chunk_size, "Samples per reported chunk");
    app->add_option("--beta", c.beta, "Offset ratio");
    app->add_option("--m", m, "Negatives per batch (auto: ceil(B/10))");
    app->add_option("--lr", c.learning_rate, "SGD learning rate");
    app->add_option("--ablation", ablation,
                    "full | no_panda | per_image_shuffle | no_averaging");
    app->add_option("--seed", c.seed, "Root seed");
    app->add_option("--domain", c.domain, "Corruption domain (0 = clean)");
    app->add_flag("--stop-prototype-grad", c.stop_prototype_grad,
                  "Do not backpropagate through the prototype");
    app->add_flag("--renormalize", c.renormalize, "Renormalise debiased features");
    app->add_option("--logit-scale", c.logit_scale, "Logit temperature");
  }

  experiment::SimulateConfig Resolve() const {
    experiment::SimulateConfig c = config;
    c.method = experiment::ParseMethod(method);
    c.ablation = adapt::ParseAblation(ablation);
    if (m != "auto") {
      const auto values = ParseNumbers(m);
      if (values.size() != 1 || values[0] < 0 || values[0] != std::floor(values[0])) {
        throw Error(ErrorCode::kParseError, "--m must be a non-negative integer or auto");
      }
      c.m = static_cast<std::size_t>(values[0]);
    }
    return c;
  }
};

int CmdNda(const CLI::App& app, const std::vector<std::string>& inputs, std::size_t patch_h,
           std::size_t patch_w, const std::string& m_text, std::uint64_t seed,
           const fs::path& out_dir, std::ostream& out) {
  Manifest manifest(app, seed);
  std::vector<ImageTensor> batch;
  for (const auto& path : inputs) batch.push_back(io::ReadImage(path));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (!batch[i].SameShape(batch.front())) {
      throw Error(ErrorCode::kHeterogeneousBatch,
                  inputs[i] + " differs in shape from " + inputs.front());
    }
  }
  nda::PatchGrid grid;
  try {
    grid = nda::PatchGrid::For(batch.front(), patch_h, patch_w);
  } catch (const Error& e) {
    throw Error(e.code(), inputs.front() + ": " + e.detail());
  }
  std::size_t m = nda::DefaultM(batch.size());
  if (m_text != "auto") m = static_cast<std::size_t>(ParseNumbers(m_text).at(0));
  fs::create_directories(out_dir);
  const auto negatives = nda::NegativeAugment(batch, grid, m, SubstreamSeed(seed, "nda"));
  for (std::size_t j = 0; j < negatives.size(); ++j) {
    char name[32];
    std::snprintf(name, sizeof(name), "neg_%04zu.tns", j);
    io::WriteTns(out_dir / name, negatives[j]);
    manifest.AddOutput(out_dir / name);
  }
  manifest.Write(out_dir);
  out << "wrote " << negatives.size() << " negatives to " << out_dir.string() << "\n";
  return kExitOk;
}

struct TheoremFlags {
  std::string s_grid = "0.5,1,2,4";
  std::string r_grid = "0,0.3,0.6,0.9";
  std::string beta_grid = "0,r/2,r,r+0.2,1";
  std::uint64_t samples = theory::kDefaultMcSamples;
  std::uint64_t seed = 0;
  std::size_t dim = 1;
};

int CmdVerifyTheorem(const CLI::App& app, const TheoremFlags& f, const std::string& out_dir,
                     std::ostream& out, std::ostream& err) {
  const auto s_values = ParseNumbers(f.s_grid);
  const auto r_values = ParseNumbers(f.r_grid);
  const auto beta_exprs = SplitList(f.beta_grid);
  if (beta_exprs.empty()) throw Error(ErrorCode::kParseError, "empty beta grid");
  if (f.samples < theory::kMinMcSamples) {
    throw Error(ErrorCode::kTooFewSamples, "--samples must be >= " +
                                               std::to_string(theory::kMinMcSamples));
  }
  if (f.dim == 0) throw Error(ErrorCode::kInvalidArgument, "--dim must be >= 1");

  Vector direction;
  if (f.dim > 1) {
    Rng rng = MakeRng(f.seed, "direction");
    std::normal_distribution<double> normal;
    direction.resize(f.dim);
    for (double& x : direction) x = normal(rng);
    direction = Normalize(direction);
  }

  struct Cell {
    theory::GaussianWorld world;
    double analytic = 0.0;
  };
  std::vector<Cell> cells;
  for (double s : s_values) {
    for (double r : r_values) {
      for (const auto& expr : beta_exprs) {
        const double beta = EvalBetaExpr(expr, r);
        Cell c;
        c.world = f.dim > 1 ? theory::GaussianWorld::Isotropic(s, r, beta, direction)
                            : theory::GaussianWorld::Scalar(s, r, beta);
        c.world.Validate();
        c.analytic = theory::AccWithOffset(s, c.world.r, beta);
        cells.push_back(std::move(c));
      }
    }
  }

  std::ostringstream csv;
  csv << "s,r,beta,analytic,mc_estimate,mc_stderr,pass\n";
  std::size_t passed = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& w = cells[i].world;
    const auto mc = theory::McAccuracy(w, f.samples, SubstreamSeed(f.seed, "mc_cell", {i}));
    const bool ok = std::abs(mc.estimate - cells[i].analytic) < 3.0 * mc.std_err;
    passed += ok;
    csv << experiment::FormatNumber(w.s) << ',' << experiment::FormatNumber(w.r) << ','
        << experiment::FormatNumber(w.beta) << ',' << experiment::FormatNumber(cells[i].analytic)
        << ',' << experiment::FormatNumber(mc.estimate) << ','
        << experiment::FormatNumber(mc.std_err) << ',' << (ok ? 1 : 0) << '\n';
  }
  if (out_dir.empty()) {
    out << csv.str();
  } else {
    fs::create_directories(out_dir);
    Manifest manifest(app, f.seed);
    WriteOutput(fs::path(out_dir) / "verify.csv", csv.str(), manifest);
    manifest.Write(out_dir);
  }
  err << passed << "/" << cells.size() << " cells within 3 standard errors\n";
  return passed == cells.size() ? kExitOk : kExitFailure;
}

int CmdSimulate(const CLI::App& app, const WorldFlags& wf, const SimFlags& sf,
                const fs::path& out_dir, std::ostream& out) {
  const auto config = sf.Resolve();
  Manifest manifest(app, config.seed);
  const world::World w = wf.Build(config.seed);
  const auto result = experiment::Simulate(w, config);
  fs::create_directories(out_dir);
  WriteOutput(out_dir / "report.json", experiment::ReportJson(w, config, result), manifest);
  WriteOutput(out_dir / "report.csv", experiment::ReportCsv(result), manifest);
  WriteOutput(out_dir / "histogram.csv", experiment::HistogramCsv(result, w.spec.num_classes),
              manifest);
  manifest.Write(out_dir);
  out << experiment::MethodName(config.method)
      << ": accuracy=" << experiment::FormatNumber(result.overall.accuracy)
      << " l1_bias=" << experiment::FormatNumber(result.overall.l1_bias)
      << " encoder_forwards=" << result.encoder_forwards << "\n";
  return kExitOk;
}

int CmdSweep(const CLI::App& app, const WorldFlags& wf, const SimFlags& sf,
             const std::string& betas, const std::string& ratios, const std::string& batches,
             const fs::path& out_dir, std::ostream& out) {
  experiment::SweepConfig sc;
  sc.base = sf.Resolve();
  sc.betas = ParseNumbers(betas);
  sc.m_ratios = ParseNumbers(ratios);
  for (double b : ParseNumbers(batches)) {
    if (b < 1 || b != std::floor(b)) throw Error(ErrorCode::kParseError, "bad batch size");
    sc.batch_sizes.push_back(static_cast<std::size_t>(b));
  }
  Manifest manifest(app, sc.base.seed);
  const world::World w = wf.Build(sc.base.seed);
  const auto rows = experiment::Sweep(w, sc);
  fs::create_directories(out_dir);
  WriteOutput(out_dir / "sweep.csv", experiment::SweepCsv(rows), manifest);
  manifest.Write(out_dir);
  out << "wrote " << rows.size() << " sweep rows to " << out_dir.string() << "\n";
  return kExitOk;
}

int CmdWorldMake(const CLI::App& app, const WorldFlags& wf, std::uint64_t seed,
                 const fs::path& out_dir, std::ostream& out) {
  Manifest manifest(app, seed);
  const world::World w = wf.Build(seed);
  world::SaveWorld(w, out_dir);
  for (const char* name : {"spec.json", "projection.tns", "textbank.tns"}) {
    manifest.AddOutput(out_dir / name);
  }
  manifest.Write(out_dir);
  out << "wrote world to " << out_dir.string() << "\n";
  return kExitOk;
}

int CmdWorldInspect(const std::string& dir, std::size_t samples, std::uint64_t seed,
                    std::ostream& out) {
  const world::World w = world::LoadWorld(dir);
  Json j;
  j["spec"] = Json::parse(world::SpecToJson(w.spec));
  j["input_size"] = w.encoder.input_size();
  double worst = 0.0;
  for (std::size_t k = 0; k < w.encoder.dim(); ++k) {
    worst = std::max(worst, std::abs(Norm(w.encoder.row(k)) - 1.0));
  }
  j["max_row_norm_error"] = worst;
  Json align = Json::array();
  for (const Vector& t : w.bank.directions()) align.push_back(t[w.spurious_axis()]);
  j["text_spurious_cosine"] = align;
  Json domains = Json::array();
  if (samples > 0) {
    for (std::size_t d = 0; d <= w.spec.num_domains; ++d) {
      const auto stream = world::SampleStream(w, samples, d, seed);
      std::vector<Vector> logits;
      std::vector<std::size_t> labels;
      std::size_t correct = 0;
      for (const auto& item : stream) {
        logits.push_back(Logits(w.encoder.Encode(item.image), w.bank));
        labels.push_back(item.label);
        correct += ArgMax(logits.back()) == item.label;
      }
      Json dj;
      dj["domain"] = d;
      dj["zero_shot_accuracy"] = static_cast<double>(correct) / static_cast<double>(samples);
      dj["l1_bias"] = metrics::L1Distance(metrics::SoftPredDist(logits),
                                          metrics::GroundTruthDist(labels, w.spec.num_classes));
      domains.push_back(dj);
    }
  }
  j["domains"] = domains;
  out << j.dump(2) << "\n";
  return kExitOk;
}

int CmdReplay(const std::string& manifest_path, const std::string& out_dir, std::ostream& out,
              std::ostream& err) {
  const auto bytes = io::ReadFileBytes(manifest_path);
  Json m;
  try {
    m = Json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, manifest_path + ": " + e.what());
  }
  std::vector<std::string> args{m.at("subcommand").get<std::string>()};
  if (args.front() == "replay") throw Error(ErrorCode::kInvalidArgument, "cannot replay a replay");
  for (const auto& [name, value] : m.at("flags").items()) {
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(name);
      continue;
    }
    const auto text = value.get<std::string>();
    if (text.empty()) continue;
    args.push_back(name);
    args.push_back(text);
  }
  for (const auto& input : m.at("inputs")) args.push_back(input.get<std::string>());
  const std::string target =
      out_dir.empty() ? fs::path(manifest_path).parent_path().string() : out_dir;
  args.push_back("--out-dir");
  args.push_back(target);
  return Run(args, out, err);
}

}  // namespace

std::vector<std::string> SplitList(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (char ch : text) {
    if (ch == ',') {
      if (!current.empty()) out.push_back(current);
      current.clear();
    } else if (ch != ' ') {
      current.push_back(ch);
    }
  }
  if (!current.empty()) out.push_back(current);
  return out;
}

double EvalBetaExpr(std::string_view expr, double r) {
  auto number = [&](std::string_view t) {
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
      throw Error(ErrorCode::kParseError, "bad beta expression '" + std::string(expr) + "'");
    }
    return v;
  };
  if (expr.empty() || expr.front() != 'r') return number(expr);
  if (expr == "r") return r;
  const std::string_view rest = expr.substr(2);
  switch (expr[1]) {
    case '/': return r / number(rest);
    case '*': return r * number(rest);
    case '+': return r + number(rest);
    case '-': return r - number(rest);
    default: throw Error(ErrorCode::kParseError, "bad beta expression '" + std::string(expr) + "'");
  }
}

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Negative-augmentation prototype debiasing for test-time adaptation", "panda"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default()->multi_option_policy(
      CLI::MultiOptionPolicy::TakeLast);
  app.fallthrough();
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (0: PANDA_THREADS or hardware)");

  std::function<int()> action;

  // nda
  auto* nda_cmd = app.add_subcommand("nda", "Write M batch-shared negative augmentations");
  std::vector<std::string> nda_inputs;
  std::size_t patch_h = nda::kDefaultPatchSize;
  std::size_t patch_w = nda::kDefaultPatchSize;
  std::string nda_m = "auto";
  std::uint64_t nda_seed = 0;
  std::string nda_out;
  nda_cmd->add_option("inputs", nda_inputs, "TNS1 or P6 images")->required();
  nda_cmd->add_option("--patch-h", patch_h, "Patch height");
  nda_cmd->add_option("--patch-w", patch_w, "Patch width");
  nda_cmd->add_option("--m", nda_m, "Negatives to write (auto: ceil(B/10))");
  nda_cmd->add_option("--seed", nda_seed, "Root seed");
  nda_cmd->add_option("--out-dir", nda_out, "Output directory")->required();
  nda_cmd->callback([&] {
    action = [&] {
      return CmdNda(*nda_cmd, nda_inputs, patch_h, patch_w, nda_m, nda_seed, nda_out, out);
    };
  });

  // verify-theorem
  auto* vt_cmd = app.add_subcommand("verify-theorem",
                                    "Monte Carlo check of the offset accuracy formulas");
  TheoremFlags tf;
  std::string vt_out;
  vt_cmd->add_option("--s-grid", tf.s_grid, "Corruption severities");
  vt_cmd->add_option("--r-grid", tf.r_grid, "Correlations in [0, 1)");
  vt_cmd->add_option("--beta-grid", tf.beta_grid, "Offset ratios; may reference r");
  vt_cmd->add_option("--samples", tf.samples, "Monte Carlo samples per cell");
  vt_cmd->add_option("--seed", tf.seed, "Root seed");
  vt_cmd->add_option("--dim", tf.dim, "Feature dimension (R = r I when > 1)");
  vt_cmd->add_option("--out-dir", vt_out, "Write verify.csv + manifest here instead of stdout");
  vt_cmd->callback([&] { action = [&] { return CmdVerifyTheorem(*vt_cmd, tf, vt_out, out, err); }; });

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Run one adaptation method over a stream");
  WorldFlags sim_world;
  SimFlags sim_flags;
  std::string sim_out;
  sim_world.Add(sim_cmd, true);
  sim_flags.Add(sim_cmd);
  sim_cmd->add_option("--out-dir", sim_out, "Output directory")->required();
  sim_cmd->callback([&] {
    action = [&] { return CmdSimulate(*sim_cmd, sim_world, sim_flags, sim_out, out); };
  });

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Grid over beta, M:B ratio and batch size");
  WorldFlags sweep_world;
  SimFlags sweep_flags;
  std::string sweep_betas = "0,0.25,0.5,0.75,1";
  std::string sweep_ratios = "0.05,0.1,0.2";
  std::string sweep_batches = "100";
  std::string sweep_out;
  sweep_world.Add(sweep_cmd, true);
  sweep_flags.Add(sweep_cmd);
  sweep_cmd->add_option("--betas", sweep_betas, "Offset ratios");
  sweep_cmd->add_option("--m-ratios", sweep_ratios, "M / B ratios");
  sweep_cmd->add_option("--batch-sizes", sweep_batches, "Batch sizes");
  sweep_cmd->add_option("--out-dir", sweep_out, "Output directory")->required();
  sweep_cmd->callback([&] {
    action = [&] {
      return CmdSweep(*sweep_cmd, sweep_world, sweep_flags, sweep_betas, sweep_ratios,
                      sweep_batches, sweep_out, out);
    };
  });

  // world-make
  auto* wm_cmd = app.add_subcommand("world-make", "Generate and save a synthetic world");
  WorldFlags wm_world;
  std::uint64_t wm_seed = 0;
  std::string wm_out;
  wm_world.Add(wm_cmd, false);
  wm_cmd->add_option("--seed", wm_seed, "Root seed");
  wm_cmd->add_option("--out-dir", wm_out, "Output directory")->required();
  wm_cmd->callback([&] { action = [&] { return CmdWorldMake(*wm_cmd, wm_world, wm_seed, wm_out, out); }; });

  // world-inspect
  auto* wi_cmd = app.add_subcommand("world-inspect", "Summarise a saved world as JSON");
  std::string wi_dir;
  std::size_t wi_samples = 1000;
  std::uint64_t wi_seed = 0;
  wi_cmd->add_option("--world-dir", wi_dir, "World directory")->required();
  wi_cmd->add_option("--samples", wi_samples, "Samples per domain for zero-shot stats");
  wi_cmd->add_option("--seed", wi_seed, "Stream seed");
  wi_cmd->callback([&] { action = [&] { return CmdWorldInspect(wi_dir, wi_samples, wi_seed, out); }; });

  // replay
  auto* rp_cmd = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  std::string rp_manifest;
  std::string rp_out;
  rp_cmd->add_option("manifest", rp_manifest, "manifest.json")->required();
  rp_cmd->add_option("--out-dir", rp_out, "Output directory (default: the manifest's)");
  rp_cmd->callback([&] { action = [&] { return CmdReplay(rp_manifest, rp_out, out, err); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (threads > 0) SetThreadCount(threads);
  int status = kExitFailure;
  try {
    status = action ? action() : kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    status = kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    status = kExitFailure;
  }
  if (threads > 0) SetThreadCount(0);
  return status;
}

}  // namespace panda::cli
