#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "postcn/augmentation.hpp"
#include "postcn/losses.hpp"
#include "postcn/model.hpp"
#include "postcn/optimizer.hpp"
#include "postcn/synthdata.hpp"

namespace postcn::train {

struct TrainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  model::EmbeddingNetConfig embedding;
  model::TcnConfig tcn;
  model::DiscriminatorConfig disc;
  nn::AdamConfig gen_opt;
  nn::AdamConfig disc_opt;
  losses::LossWeights weights;
  aug::AugmentationConfig augmentation;  // all rates zero unless configured
  aug::RenderParams render;
  int epochs = 20;
  int batch_size = 8;
  int steps_per_epoch = 25;
  int workers = 1;
  // Leading fraction of corpus sequences treated as 2D-only (no 3D labels;
  // they contribute only L_2d and the adversarial term).
  double two_d_fraction = 0.0;
  int disc_steps = 1;  // discriminator updates per generator step when w3 > 0
  std::uint64_t seed = 1;

  static TrainConfig from_json_text(const std::string& text);
  std::string to_json_text() const;
  static TrainConfig defaults();
};

struct EpochMetrics {
  double l3d = 0.0;
  double lmv = 0.0;
  double l2d = 0.0;
  double lgen = 0.0;
  double ldisc = 0.0;
  double total = 0.0;
  long gen_steps = 0;
  long disc_updates = 0;
};

struct EvalOptions {
  int stride = 8;                      // center-frame stride over each sequence
  double point_occlusion_rate = 0.0;   // test-time corruption
  std::uint64_t occlusion_seed = 7;
};

struct EvalReport {
  double mpjpe = 0.0;
  double p_mpjpe = 0.0;
  double pck150 = 0.0;
  double mae = 0.0;
  long frames = 0;
  double bone_length_variance = 0.0;
  std::string to_json_text() const;  // the five spec keys only
};

// Supervised + adversarial trainer over a synthetic corpus. Deterministic
// given config.seed; per-sample randomness comes from streams forked by
// global sample index, so results do not depend on the worker count.
class Trainer {
 public:
  Trainer(TrainConfig config, std::vector<synthdata::SequenceData> corpus);

  // One pass of steps_per_epoch batches: per step a discriminator update
  // (when w3 > 0) followed by a generator update on the Eq.-style total loss.
  // Aborts with TrainError on non-finite losses.
  EpochMetrics train_epoch();

  // Per-epoch loss weights and augmentation (e.g. supervised warm-up before
  // a heavily-occluded adversarial phase).
  void set_loss_weights(const losses::LossWeights& weights) { config_.weights = weights; }
  void set_augmentation(const aug::AugmentationConfig& augmentation) {
    config_.augmentation = augmentation;
  }

  EvalReport evaluate(const std::vector<synthdata::SequenceData>& eval_corpus,
                      const EvalOptions& options) const;

  // Predicted center poses and their frame indices for one sequence.
  std::pair<skeleton::PoseSequence3D, std::vector<int>> predict_sequence(
      const synthdata::SequenceData& data, const EvalOptions& options) const;

  double discriminator_window_score(const skeleton::PoseSequence3D& window_poses) const;

  nn::ParamStore& generator_params() { return gen_params_; }
  const nn::ParamStore& generator_params() const { return gen_params_; }
  nn::ParamStore& discriminator_params() { return disc_params_; }
  const TrainConfig& config() const { return config_; }
  int epochs_run() const { return epoch_index_; }

  // Rebuild a trainer-compatible parameter set from a checkpoint produced by
  // save(); splits "disc.*" names out of the merged store.
  void load_params(const nn::ParamStore& merged);
  nn::ParamStore merged_params() const;

 private:
  struct SampleSpec;
  struct SampleResult;
  SampleResult run_generator_sample(const SampleSpec& spec) const;
  void discriminator_update(int step_index, EpochMetrics& metrics);

  TrainConfig config_;
  std::vector<synthdata::SequenceData> corpus_;
  nn::ParamStore gen_params_;
  nn::ParamStore disc_params_;
  nn::OptimizerState gen_opt_state_;
  nn::OptimizerState disc_opt_state_;
  int epoch_index_ = 0;
  int adv_outputs_ = 1;  // pose-roll length when the adversarial term is on
};

}  // namespace postcn::train
