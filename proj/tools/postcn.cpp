// Command-line surface for the pose pipeline: synthetic data generation,
// occlusion augmentation, training, evaluation, gradient checking, and
// descriptor dumps. JSON results go to stdout, logs to stderr; exit codes:
// 0 success, 1 usage error, 2 runtime error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "postcn/augmentation.hpp"
#include "postcn/checkpoint.hpp"
#include "postcn/grad_suite.hpp"
#include "postcn/kcs.hpp"
#include "postcn/synthdata.hpp"
#include "postcn/trainer.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

int log_level() {
  static const int level = [] {
    const char* env = std::getenv("POSTCN_LOG");
    if (env == nullptr) return 2;
    const std::string v(env);
    if (v == "error") return 0;
    if (v == "warn") return 1;
    if (v == "info") return 2;
    if (v == "debug") return 3;
    return 2;
  }();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "[postcn] " << msg << "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

int run_gen_data(const std::string& spec_path, const std::string& out_path,
                 std::optional<std::uint64_t> seed) {
  using namespace postcn;
  const std::string text = read_file(spec_path);
  const auto& topo = skeleton::default_topology();

  if (synthdata::json_is_corpus_spec(text)) {
    auto corpus = synthdata::CorpusSpec::from_json_text(text);
    if (seed) corpus.base.seed = *seed;
    const auto data = synthdata::generate_corpus(corpus, topo);
    fs::create_directories(out_path);
    for (size_t i = 0; i < data.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof(name), "seq_%04zu.jsonl", i);
      synthdata::write_dataset((fs::path(out_path) / name).string(), data[i]);
    }
    log_info("wrote " + std::to_string(data.size()) + " sequences to " + out_path);
  } else {
    auto spec = synthdata::MotionSpec::from_json_text(text);
    if (seed) spec.seed = *seed;
    synthdata::write_dataset(out_path, synthdata::generate_sequence_data(spec, topo));
    log_info("wrote " + out_path);
  }
  return 0;
}

int run_augment(const std::string& config_path, const std::string& in_path,
                const std::string& out_path, std::string mask_path,
                std::optional<std::uint64_t> seed) {
  using namespace postcn;
  auto config = aug::AugmentationConfig::from_json_text(read_file(config_path));
  if (seed) config.seed = *seed;
  auto data = synthdata::read_dataset(in_path);

  const aug::RenderParams render;  // default 64x64, sigma 2
  const auto result = aug::apply_pipeline(config, data.j2d, data.topology, render);

  // Re-run the pose-space stages with the pipeline's documented substreams so
  // the written 2D coordinates match what was rendered.
  const Rng root(config.seed);
  aug::MaskRecord scratch;
  if (config.shift_probability > 0.0 && config.shift_max > 0) {
    Rng r = root.fork(1);
    aug::shift_keypoints(data.j2d, config.shift_max, config.shift_probability, r, scratch);
  }
  if (config.swap_probability > 0.0) {
    Rng r = root.fork(2);
    aug::swap_symmetric(data.j2d, config.swap_probability, r, data.topology, scratch);
  }
  for (const auto& [f, k] : result.masks.masked_points) {
    data.j2d[static_cast<size_t>(f)].visibility[static_cast<size_t>(k)] = 0;
  }
  for (const auto& [f, k] : result.masks.area_masked_points) {
    data.j2d[static_cast<size_t>(f)].visibility[static_cast<size_t>(k)] = 0;
  }
  for (int f : result.masks.masked_frames) {
    auto& vis = data.j2d[static_cast<size_t>(f)].visibility;
    std::fill(vis.begin(), vis.end(), 0);
  }

  synthdata::write_dataset(out_path, data);
  if (mask_path.empty()) mask_path = out_path + ".masks.json";
  write_file(mask_path, result.masks.to_json_text());
  log_info("wrote " + out_path + " and " + mask_path);
  return 0;
}

int run_train(const std::string& config_path, const std::string& data_path,
              const std::string& out_path, std::optional<std::uint64_t> seed,
              std::optional<int> workers) {
  using namespace postcn;
  auto config = config_path.empty() ? train::TrainConfig::defaults()
                                    : train::TrainConfig::from_json_text(read_file(config_path));
  if (seed) config.seed = *seed;
  if (workers) config.workers = *workers;

  auto corpus = synthdata::load_corpus(data_path);
  train::Trainer trainer(config, std::move(corpus));
  for (int e = 0; e < config.epochs; ++e) {
    const auto m = trainer.train_epoch();
    std::ostringstream ss;
    ss << "epoch " << (e + 1) << "/" << config.epochs << " l3d=" << m.l3d << " lmv=" << m.lmv
       << " l2d=" << m.l2d << " lgen=" << m.lgen << " ldisc=" << m.ldisc;
    log_info(ss.str());
  }
  nn::save_checkpoint(out_path, trainer.merged_params(), trainer.config().to_json_text());
  log_info("checkpoint written to " + out_path);

  json summary;
  summary["epochs"] = config.epochs;
  summary["checkpoint"] = out_path;
  std::cout << summary.dump() << "\n";
  return 0;
}

int run_eval(const std::string& ckpt_path, const std::string& data_path,
             const std::string& config_path) {
  using namespace postcn;
  const auto ckpt = nn::load_checkpoint(ckpt_path);
  auto config = train::TrainConfig::from_json_text(ckpt.config_json);

  train::EvalOptions options;
  if (!config_path.empty()) {
    const json j = json::parse(read_file(config_path));
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it.key() != "stride" && it.key() != "point_occlusion_rate" &&
          it.key() != "occlusion_seed") {
        throw std::runtime_error("unknown key \"" + it.key() + "\" in eval config");
      }
    }
    options.stride = j.value("stride", options.stride);
    options.point_occlusion_rate = j.value("point_occlusion_rate", options.point_occlusion_rate);
    options.occlusion_seed = j.value("occlusion_seed", options.occlusion_seed);
  }

  const auto corpus = synthdata::load_corpus(data_path);
  train::Trainer trainer(config, corpus);
  trainer.load_params(ckpt.params);
  const auto report = trainer.evaluate(corpus, options);
  std::cout << report.to_json_text() << "\n";
  return 0;
}

int run_grad_check(std::optional<std::uint64_t> seed, const std::string& config_path) {
  using namespace postcn;
  auto cases = nn::run_gradient_suite(seed.value_or(12345), 3, 12);
  if (!config_path.empty()) {
    // Additionally check the gradients of the configured architecture.
    auto config = train::TrainConfig::from_json_text(read_file(config_path));
    config.embedding.channels = skeleton::default_topology().joint_count();
    config.disc.feature_length = kcs::feature_length(skeleton::default_topology());
    config.disc.coord_block_rows = 3 * skeleton::default_topology().joint_count();
    const auto model_cases = nn::run_model_gradient_checks(
        config.embedding, config.tcn, config.disc, seed.value_or(12345), 3, 10);
    for (auto c : model_cases) {
      c.name = "configured_" + c.name;
      cases.push_back(std::move(c));
    }
  }
  const double max_err = nn::suite_max_rel_error(cases);

  json out;
  out["max_rel_error"] = max_err;
  json details = json::array();
  for (const auto& c : cases) {
    details.push_back({{"name", c.name},
                       {"max_rel_error", c.report.max_rel_error},
                       {"checked", c.report.checked},
                       {"excluded", c.report.excluded.size()}});
  }
  out["cases"] = details;
  std::cout << out.dump() << "\n";
  if (max_err >= 1e-4) {
    std::cerr << "gradient check failed: max relative error " << max_err << "\n";
    return 2;
  }
  return 0;
}

int run_describe(const std::string& data_path, int interval) {
  using namespace postcn;
  const auto data = synthdata::read_dataset(data_path);
  const auto features = kcs::sequence_descriptor(data.j3d, data.topology, interval);
  for (Eigen::Index t = 0; t < features.per_frame.cols(); ++t) {
    json line;
    line["t"] = static_cast<int>(t);
    json vec = json::array();
    for (Eigen::Index r = 0; r < features.per_frame.rows(); ++r) {
      vec.push_back(features.per_frame(r, t));
    }
    line["features"] = std::move(vec);
    std::cout << line.dump() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatio-temporal 3D pose engine"};
  app.require_subcommand(1);

  std::string spec_path, out_path, config_path, in_path, data_path, ckpt_path, mask_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  int interval = 1;

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic sequence or corpus");
  gen->add_option("--spec", spec_path, "Motion or corpus spec JSON")->required();
  gen->add_option("--out", out_path, "Output .jsonl file (or directory for a corpus)")->required();
  gen->add_option("--seed", seed, "Override the spec seed");

  auto* augment = app.add_subcommand("augment", "Apply occlusion augmentation to a dataset");
  augment->add_option("--config", config_path, "Augmentation config JSON")->required();
  augment->add_option("--in", in_path, "Input dataset .jsonl")->required();
  augment->add_option("--out", out_path, "Output dataset .jsonl")->required();
  augment->add_option("--mask-out", mask_path, "Mask record path (default <out>.masks.json)");
  augment->add_option("--seed", seed, "Override the config seed");

  auto* train_cmd = app.add_subcommand("train", "Train the pose estimator");
  train_cmd->add_option("--config", config_path, "Train config JSON (defaults when omitted)");
  train_cmd->add_option("--data", data_path, "Dataset file or directory")->required();
  train_cmd->add_option("--out", out_path, "Checkpoint output path")->required();
  train_cmd->add_option("--seed", seed, "Override the config seed");
  train_cmd->add_option("--workers", workers, "Worker threads (deterministic reduction)");

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval_cmd->add_option("--ckpt", ckpt_path, "Checkpoint path")->required();
  eval_cmd->add_option("--data", data_path, "Dataset file or directory")->required();
  eval_cmd->add_option("--config", config_path, "Eval options JSON");

  auto* grad = app.add_subcommand("grad-check", "Finite-difference gradient validation");
  grad->add_option("--seed", seed, "Random point seed");
  grad->add_option("--config", config_path, "Also check the configured model architecture");

  auto* describe = app.add_subcommand("describe", "Dump per-frame KCS descriptors as JSON lines");
  describe->add_option("--data", data_path, "Dataset .jsonl")->required();
  describe->add_option("--interval", interval, "TKCS interval")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) return run_gen_data(spec_path, out_path, seed);
    if (augment->parsed()) return run_augment(config_path, in_path, out_path, mask_path, seed);
    if (train_cmd->parsed()) return run_train(config_path, data_path, out_path, seed, workers);
    if (eval_cmd->parsed()) return run_eval(ckpt_path, data_path, config_path);
    if (grad->parsed()) return run_grad_check(seed, config_path);
    if (describe->parsed()) return run_describe(data_path, interval);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
