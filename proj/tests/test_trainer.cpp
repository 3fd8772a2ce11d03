#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "postcn/checkpoint.hpp"
#include "postcn/trainer.hpp"

using namespace postcn;
using train::TrainConfig;
using train::Trainer;

namespace {

// Small strides/window so a whole training run takes a fraction of a second.
TrainConfig tiny_config(std::uint64_t seed = 1) {
  TrainConfig c = TrainConfig::defaults();
  c.embedding.embed_dim = 16;
  c.embedding.height = 32;
  c.embedding.width = 32;
  c.tcn.embed_dim = 16;
  c.tcn.temporal_length = 32;
  c.tcn.strides = {1, 2};
  c.tcn.branch_channels = 8;
  c.disc.window = 16;
  c.disc.channels = 8;
  c.render.height = 32;
  c.render.width = 32;
  c.epochs = 2;
  c.batch_size = 4;
  c.steps_per_epoch = 3;
  c.weights = {0.0, 0.0, 0.0};
  c.seed = seed;
  return c;
}

std::vector<synthdata::SequenceData> tiny_corpus(int sequences = 4, int frames = 52,
                                                 std::uint64_t seed = 77) {
  synthdata::CorpusSpec corpus;
  corpus.sequences = sequences;
  corpus.base.frames = frames;
  corpus.base.seed = seed;
  corpus.base.projection = {3.0, 16.0, 16.0};
  return synthdata::generate_corpus(corpus, skeleton::default_topology());
}

bool stores_equal(const nn::ParamStore& a, const nn::ParamStore& b) {
  if (a.params.size() != b.params.size()) return false;
  for (const auto& [name, tensor] : a.params) {
    const auto it = b.params.find(name);
    if (it == b.params.end() || it->second.values != tensor.values) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("training is bit-deterministic for a fixed seed") {
  const auto corpus = tiny_corpus();
  Trainer a(tiny_config(5), corpus);
  Trainer b(tiny_config(5), corpus);
  for (int e = 0; e < 2; ++e) {
    a.train_epoch();
    b.train_epoch();
  }
  CHECK(stores_equal(a.merged_params(), b.merged_params()));

  Trainer c(tiny_config(6), corpus);
  c.train_epoch();
  c.train_epoch();
  CHECK_FALSE(stores_equal(a.merged_params(), c.merged_params()));
}

TEST_CASE("results are independent of the worker count") {
  const auto corpus = tiny_corpus();
  auto config = tiny_config(9);
  Trainer one(config, corpus);
  config.workers = 2;
  Trainer two(config, corpus);
  one.train_epoch();
  two.train_epoch();
  CHECK(stores_equal(one.merged_params(), two.merged_params()));
}

TEST_CASE("inert configuration knobs leave the supervised run untouched") {
  // With all augmentation rates at zero and w3 = 0, the run must equal a
  // plain supervised regression run bit for bit.
  const auto corpus = tiny_corpus();
  auto plain = tiny_config(11);

  auto decorated = plain;
  decorated.disc_steps = 7;                       // unused without w3
  decorated.augmentation.shift_max = 25;          // unused at probability 0
  decorated.augmentation.area_occluder.max_width = 31;  // unused at count 0
  decorated.augmentation.seed = 999;              // never consulted

  Trainer a(plain, corpus);
  Trainer b(decorated, corpus);
  for (int e = 0; e < 2; ++e) {
    a.train_epoch();
    b.train_epoch();
  }
  CHECK(stores_equal(a.merged_params(), b.merged_params()));
}

TEST_CASE("supervised training loss trends downward over five epochs") {
  // At least 80% of epoch-to-epoch deltas negative, pooled over 3 seeds.
  const auto corpus = tiny_corpus(6, 52, 3131);
  int negative = 0, total = 0;
  for (std::uint64_t seed : {21, 22, 23}) {
    auto config = tiny_config(seed);
    config.steps_per_epoch = 20;
    config.gen_opt.learning_rate = 5e-3;
    Trainer trainer(config, corpus);
    std::vector<double> losses;
    for (int e = 0; e < 5; ++e) losses.push_back(trainer.train_epoch().l3d);
    for (size_t i = 1; i < losses.size(); ++i) {
      total += 1;
      if (losses[i] < losses[i - 1]) negative += 1;
    }
  }
  CHECK(static_cast<double>(negative) / total >= 0.8);
}

TEST_CASE("adversarial epochs run all loss components and stay finite") {
  const auto corpus = tiny_corpus();
  auto config = tiny_config(31);
  config.weights = {0.5, 0.1, 0.01};
  config.two_d_fraction = 0.3;  // sequence 0 of 4 becomes 2D-only
  config.steps_per_epoch = 2;
  config.batch_size = 4;
  Trainer trainer(config, corpus);
  const auto metrics = trainer.train_epoch();
  CHECK(metrics.disc_updates == 2);
  CHECK(std::isfinite(metrics.l3d));
  CHECK(std::isfinite(metrics.lgen));
  CHECK(std::isfinite(metrics.ldisc));
  CHECK(metrics.lgen > 0.0);   // -log D is positive
  CHECK(metrics.ldisc > 0.0);  // BCE is positive
}

TEST_CASE("non-finite parameters abort the epoch with diagnostics") {
  const auto corpus = tiny_corpus();
  Trainer trainer(tiny_config(41), corpus);
  trainer.generator_params().at("tcn.head.bias").values[0] = std::nan("");
  CHECK_THROWS_AS(trainer.train_epoch(), train::TrainError);
}

TEST_CASE("checkpoint round trip preserves parameters and evaluation") {
  namespace fs = std::filesystem;
  const auto corpus = tiny_corpus();
  auto config = tiny_config(51);
  Trainer trainer(config, corpus);
  trainer.train_epoch();

  const auto path = (fs::temp_directory_path() / "postcn_test_ckpt.bin").string();
  nn::save_checkpoint(path, trainer.merged_params(), trainer.config().to_json_text());
  const auto ckpt = nn::load_checkpoint(path);
  CHECK(stores_equal(ckpt.params, trainer.merged_params()));

  const auto reloaded_config = TrainConfig::from_json_text(ckpt.config_json);
  Trainer restored(reloaded_config, corpus);
  restored.load_params(ckpt.params);

  train::EvalOptions options;
  options.stride = 8;
  const auto before = trainer.evaluate(corpus, options);
  const auto after = restored.evaluate(corpus, options);
  CHECK(before.mpjpe == after.mpjpe);
  CHECK(before.p_mpjpe == after.p_mpjpe);

  // Re-saving produces a byte-identical file.
  const auto path2 = (fs::temp_directory_path() / "postcn_test_ckpt2.bin").string();
  nn::save_checkpoint(path2, restored.merged_params(), restored.config().to_json_text());
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  const std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  const std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(b1 == b2);
  fs::remove(path);
  fs::remove(path2);
}

TEST_CASE("evaluation report carries exactly the five advertised keys") {
  const auto corpus = tiny_corpus();
  Trainer trainer(tiny_config(61), corpus);
  train::EvalOptions options;
  options.stride = 16;
  const auto report = trainer.evaluate(corpus, options);
  CHECK(report.frames > 0);
  CHECK(report.mpjpe >= 0.0);
  CHECK(report.p_mpjpe <= report.mpjpe + 1e-9);
  CHECK(report.pck150 >= 0.0);
  CHECK(report.pck150 <= 100.0);

  const auto text = report.to_json_text();
  CHECK(text.find("\"mpjpe\"") != std::string::npos);
  CHECK(text.find("\"p_mpjpe\"") != std::string::npos);
  CHECK(text.find("\"pck150\"") != std::string::npos);
  CHECK(text.find("\"mae\"") != std::string::npos);
  CHECK(text.find("\"frames\"") != std::string::npos);
  CHECK(text.find("bone_length_variance") == std::string::npos);
}

TEST_CASE("test-time point occlusion is deterministic and degrades accuracy") {
  const auto corpus = tiny_corpus();
  auto config = tiny_config(71);
  config.epochs = 3;
  config.steps_per_epoch = 6;
  config.gen_opt.learning_rate = 3e-3;
  Trainer trainer(config, corpus);
  for (int e = 0; e < 3; ++e) trainer.train_epoch();

  train::EvalOptions clean;
  clean.stride = 8;
  train::EvalOptions occluded = clean;
  occluded.point_occlusion_rate = 0.5;

  const auto clean_report = trainer.evaluate(corpus, clean);
  const auto occluded_a = trainer.evaluate(corpus, occluded);
  const auto occluded_b = trainer.evaluate(corpus, occluded);
  CHECK(occluded_a.mpjpe == occluded_b.mpjpe);
  CHECK(occluded_a.mpjpe > clean_report.mpjpe);
}

TEST_CASE("config JSON round trips and rejects unknown keys") {
  auto config = tiny_config(81);
  config.weights.w3 = 0.01;
  const auto text = config.to_json_text();
  const auto back = TrainConfig::from_json_text(text);
  CHECK(back.tcn.strides == config.tcn.strides);
  CHECK(back.embedding.embed_dim == 16);
  CHECK(back.weights.w3 == doctest::Approx(0.01));
  CHECK(back.seed == 81);
  CHECK_THROWS(TrainConfig::from_json_text(R"({"model": {"bogus": 1}})"));
  CHECK_THROWS(TrainConfig::from_json_text(R"({"nonsense": {}})"));
}
