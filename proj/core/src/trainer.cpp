#include "postcn/trainer.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <span>
#include <thread>

#include "postcn/kcs.hpp"
#include "postcn/metrics.hpp"

namespace postcn::train {

namespace {

using nlohmann::json;
using skeleton::Pose3D;

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* k) { return it.key() == k; }) == allowed.end()) {
      throw TrainError("unknown key \"" + it.key() + "\" in " + where);
    }
  }
}

std::vector<double> to_row_major(const Eigen::MatrixXd& m) {
  std::vector<double> out(static_cast<size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out[static_cast<size_t>(r * m.cols() + c)] = m(r, c);
    }
  }
  return out;
}

std::vector<double> pose_row_major(const Pose3D& pose) {
  std::vector<double> out(static_cast<size_t>(pose.coords.size()));
  for (Eigen::Index j = 0; j < pose.coords.rows(); ++j) {
    for (int a = 0; a < 3; ++a) out[static_cast<size_t>(3 * j + a)] = pose.coords(j, a);
  }
  return out;
}

Pose3D pose_from_values(std::span<const double> v, int k) {
  Pose3D pose;
  pose.coords.resize(k, 3);
  for (int j = 0; j < k; ++j) {
    for (int a = 0; a < 3; ++a) pose.coords(j, a) = v[static_cast<size_t>(3 * j + a)];
  }
  return pose;
}

}  // namespace

TrainConfig TrainConfig::defaults() {
  TrainConfig c;
  c.augmentation.frame_occlusion_rate = 0.0;
  c.augmentation.point_occlusion_rate = 0.0;
  c.augmentation.area_occluder.count = 0;
  c.augmentation.noise_amplitude = 0.0;
  c.augmentation.shift_probability = 0.0;
  c.augmentation.swap_probability = 0.0;
  return c;
}

TrainConfig TrainConfig::from_json_text(const std::string& text) {
  const json j = json::parse(text);
  reject_unknown_keys(j,
                      {"model", "optimizer", "loss_weights", "augmentation", "train"},
                      "train config");
  TrainConfig c = defaults();

  if (j.contains("model")) {
    const json& m = j.at("model");
    reject_unknown_keys(m,
                        {"embed_dim", "temporal_length", "strides", "branch_channels",
                         "pool_factor", "output_scale", "tkcs_interval", "disc_window",
                         "disc_channels"},
                        "model config");
    c.embedding.embed_dim = m.value("embed_dim", c.embedding.embed_dim);
    c.tcn.embed_dim = c.embedding.embed_dim;
    c.tcn.temporal_length = m.value("temporal_length", c.tcn.temporal_length);
    if (m.contains("strides")) c.tcn.strides = m.at("strides").get<std::vector<int>>();
    c.tcn.branch_channels = m.value("branch_channels", c.tcn.branch_channels);
    c.embedding.pool_factor = m.value("pool_factor", c.embedding.pool_factor);
    c.tcn.output_scale_mm = m.value("output_scale", c.tcn.output_scale_mm);
    c.disc.tkcs_interval = m.value("tkcs_interval", c.disc.tkcs_interval);
    c.disc.window = m.value("disc_window", c.disc.window);
    c.disc.channels = m.value("disc_channels", c.disc.channels);
  }
  if (j.contains("optimizer")) {
    const json& o = j.at("optimizer");
    reject_unknown_keys(o, {"lr", "beta1", "beta2", "eps", "disc_lr"}, "optimizer config");
    c.gen_opt.learning_rate = o.value("lr", c.gen_opt.learning_rate);
    c.gen_opt.beta1 = o.value("beta1", c.gen_opt.beta1);
    c.gen_opt.beta2 = o.value("beta2", c.gen_opt.beta2);
    c.gen_opt.epsilon = o.value("eps", c.gen_opt.epsilon);
    c.disc_opt = c.gen_opt;
    c.disc_opt.learning_rate = o.value("disc_lr", c.gen_opt.learning_rate);
  }
  if (j.contains("loss_weights")) {
    const json& w = j.at("loss_weights");
    reject_unknown_keys(w, {"w1", "w2", "w3"}, "loss weights");
    c.weights.w1 = w.value("w1", c.weights.w1);
    c.weights.w2 = w.value("w2", c.weights.w2);
    c.weights.w3 = w.value("w3", c.weights.w3);
  }
  if (j.contains("augmentation")) {
    c.augmentation = aug::AugmentationConfig::from_json_text(j.at("augmentation").dump());
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    reject_unknown_keys(t,
                        {"epochs", "batch_size", "steps_per_epoch", "workers", "two_d_fraction",
                         "disc_steps", "seed", "sigma", "heatmap_height", "heatmap_width"},
                        "train section");
    c.epochs = t.value("epochs", c.epochs);
    c.batch_size = t.value("batch_size", c.batch_size);
    c.steps_per_epoch = t.value("steps_per_epoch", c.steps_per_epoch);
    c.workers = t.value("workers", c.workers);
    c.two_d_fraction = t.value("two_d_fraction", c.two_d_fraction);
    c.disc_steps = t.value("disc_steps", c.disc_steps);
    c.seed = t.value("seed", c.seed);
    c.render.sigma = t.value("sigma", c.render.sigma);
    c.render.height = t.value("heatmap_height", c.render.height);
    c.render.width = t.value("heatmap_width", c.render.width);
  }
  return c;
}

std::string TrainConfig::to_json_text() const {
  json j;
  j["model"] = {{"embed_dim", embedding.embed_dim},
                {"temporal_length", tcn.temporal_length},
                {"strides", tcn.strides},
                {"branch_channels", tcn.branch_channels},
                {"pool_factor", embedding.pool_factor},
                {"output_scale", tcn.output_scale_mm},
                {"tkcs_interval", disc.tkcs_interval},
                {"disc_window", disc.window},
                {"disc_channels", disc.channels}};
  j["optimizer"] = {{"lr", gen_opt.learning_rate},
                    {"beta1", gen_opt.beta1},
                    {"beta2", gen_opt.beta2},
                    {"eps", gen_opt.epsilon},
                    {"disc_lr", disc_opt.learning_rate}};
  j["loss_weights"] = {{"w1", weights.w1}, {"w2", weights.w2}, {"w3", weights.w3}};
  j["augmentation"] = json::parse(augmentation.to_json_text());
  j["train"] = {{"epochs", epochs},
                {"batch_size", batch_size},
                {"steps_per_epoch", steps_per_epoch},
                {"workers", workers},
                {"two_d_fraction", two_d_fraction},
                {"disc_steps", disc_steps},
                {"seed", seed},
                {"sigma", render.sigma},
                {"heatmap_height", render.height},
                {"heatmap_width", render.width}};
  return j.dump();
}

std::string EvalReport::to_json_text() const {
  json j;
  j["mpjpe"] = mpjpe;
  j["p_mpjpe"] = p_mpjpe;
  j["pck150"] = pck150;
  j["mae"] = mae;
  j["frames"] = frames;
  return j.dump();
}

// Per-sample plan drawn up front in sample order, so worker threads never
// touch an rng.
struct Trainer::SampleSpec {
  int sequence = 0;
  int window_start = 0;
  bool two_d_only = false;
  std::uint64_t aug_seed = 0;
  bool use_multiview = false;
  losses::CameraRotation multiview_rotation;
  bool use_adversarial = false;
  losses::CameraRotation adv_rotation;
  int n_out = 1;
  int t_in = 0;
};

struct Trainer::SampleResult {
  double l3d = -1.0;
  double lmv = -1.0;
  double l2d = -1.0;
  double lgen = -1.0;
  double total = 0.0;
  bool has_3d = false;
  std::unique_ptr<nn::Tape> tape;  // kept alive until grads are collected
  skeleton::PoseSequence3D predicted;  // adversarial roll poses (values only)
};

Trainer::Trainer(TrainConfig config, std::vector<synthdata::SequenceData> corpus)
    : config_(std::move(config)), corpus_(std::move(corpus)) {
  if (corpus_.empty()) throw TrainError("empty dataset");
  const auto& topo = corpus_.front().topology;
  config_.embedding.channels = topo.joint_count();
  config_.embedding.height = config_.render.height;
  config_.embedding.width = config_.render.width;
  config_.tcn.joint_count = topo.joint_count();
  config_.tcn.root_index = topo.root_index;
  config_.disc.feature_length = kcs::feature_length(topo);
  config_.disc.coord_block_rows = 3 * topo.joint_count();
  model::validate_config(config_.embedding, config_.tcn);

  const int min_frames = config_.tcn.temporal_length;
  for (const auto& seq : corpus_) {
    if (static_cast<int>(seq.j3d.size()) < min_frames) {
      throw TrainError("sequence shorter than the temporal window");
    }
  }

  adv_outputs_ = config_.disc.window + config_.disc.tkcs_interval;

  Rng init_rng = Rng(config_.seed).fork(10);
  model::init_embedding_params(config_.embedding, gen_params_, init_rng);
  model::init_tcn_params(config_.tcn, gen_params_, init_rng);
  Rng disc_rng = Rng(config_.seed).fork(11);
  model::init_discriminator_params(config_.disc, disc_params_, disc_rng);

  // Head bias starts at the corpus mean pose (in head units) so the first
  // predictions are human-shaped rather than collapsed at the origin.
  Eigen::MatrixXd mean_pose =
      Eigen::MatrixXd::Zero(config_.tcn.joint_count, 3);
  long counted = 0;
  for (const auto& seq : corpus_) {
    for (const auto& pose : seq.j3d) {
      mean_pose += pose.coords;
      ++counted;
    }
  }
  mean_pose /= static_cast<double>(counted);
  auto& head_bias = gen_params_.at("tcn.head.bias");
  for (int j = 0; j < config_.tcn.joint_count; ++j) {
    for (int a = 0; a < 3; ++a) {
      head_bias.values[static_cast<size_t>(3 * j + a)] =
          mean_pose(j, a) / config_.tcn.output_scale_mm;
    }
  }

  gen_opt_state_ = nn::make_optimizer_state(gen_params_, config_.gen_opt);
  disc_opt_state_ = nn::make_optimizer_state(disc_params_, config_.disc_opt);
}

Trainer::SampleResult Trainer::run_generator_sample(const SampleSpec& spec) const {
  const auto& seq = corpus_[static_cast<size_t>(spec.sequence)];
  const auto& topo = seq.topology;
  const int k = topo.joint_count();

  SampleResult result;
  result.tape = std::make_unique<nn::Tape>();
  nn::Tape& tape = *result.tape;

  // Window heatmaps through the augmentation pipeline (input corruption
  // only; labels stay clean).
  skeleton::PoseSequence2D window_2d(seq.j2d.begin() + spec.window_start,
                                     seq.j2d.begin() + spec.window_start + spec.t_in);
  aug::AugmentationConfig aug_cfg = config_.augmentation;
  aug_cfg.seed = spec.aug_seed;
  const auto pipeline = aug::apply_pipeline(aug_cfg, window_2d, topo, config_.render);
  const Eigen::MatrixXd pooled =
      model::pool_heatmap_window(pipeline.heatmaps, config_.embedding.pool_factor);

  const int pooled_in = tape.constant({static_cast<int>(pooled.rows()), spec.t_in},
                                      to_row_major(pooled));
  const int embeddings = model::tape_embed_window(tape, config_.embedding, gen_params_, pooled_in);
  std::vector<int> poses;
  model::tape_pose_roll(tape, config_.tcn, gen_params_, embeddings, spec.n_out, &poses);
  const int first_center = spec.window_start + model::roll_first_center(spec.t_in, spec.n_out);

  int l3d = -1, lmv = -1, l2d = -1, lgen = -1;

  if (!spec.two_d_only) {
    // L_3d over every roll output against its ground-truth frame.
    std::vector<int> pred_parts, gt_parts;
    for (int j = 0; j < spec.n_out; ++j) {
      pred_parts.push_back(poses[static_cast<size_t>(j)]);
      gt_parts.push_back(tape.constant({k, 3}, pose_row_major(seq.j3d[static_cast<size_t>(
                                                  first_center + j)])));
    }
    l3d = tape.mse(tape.concat_rows(pred_parts), tape.concat_rows(gt_parts));
    result.has_3d = true;
  } else {
    // 2D-only window: mean reprojection loss over roll outputs.
    int acc = -1;
    for (int j = 0; j < spec.n_out; ++j) {
      const int term = losses::tape_loss_2d(tape, poses[static_cast<size_t>(j)],
                                            seq.j2d[static_cast<size_t>(first_center + j)], topo,
                                            seq.spec.projection);
      acc = acc < 0 ? term : tape.add(acc, term);
    }
    l2d = tape.scale(acc, 1.0 / static_cast<double>(spec.n_out));
  }

  if (spec.use_multiview) {
    // Second view: rotate the ground truth window, re-project, re-render
    // (clean), and demand prediction consistency under the same rotation.
    skeleton::PoseSequence3D view2_3d;
    view2_3d.reserve(static_cast<size_t>(spec.t_in));
    for (int t = 0; t < spec.t_in; ++t) {
      view2_3d.push_back(Pose3D{seq.j3d[static_cast<size_t>(spec.window_start + t)].coords *
                                spec.multiview_rotation.mat.transpose()});
    }
    const auto view2_2d = synthdata::project_to_2d(view2_3d, topo, seq.spec.projection);
    heatmap::HeatmapSequence view2_maps;
    view2_maps.reserve(view2_2d.size());
    for (const auto& pose : view2_2d) {
      view2_maps.push_back(heatmap::render_heatmaps(pose, config_.render.sigma,
                                                    config_.render.height, config_.render.width));
    }
    const Eigen::MatrixXd pooled2 =
        model::pool_heatmap_window(view2_maps, config_.embedding.pool_factor);
    const int pooled2_in = tape.constant({static_cast<int>(pooled2.rows()), spec.t_in},
                                         to_row_major(pooled2));
    const int emb2 = model::tape_embed_window(tape, config_.embedding, gen_params_, pooled2_in);
    std::vector<int> poses2;
    model::tape_pose_roll(tape, config_.tcn, gen_params_, emb2, spec.n_out, &poses2);

    int acc = -1;
    for (int j = 0; j < spec.n_out; ++j) {
      const int term = losses::tape_loss_multiview(tape, poses[static_cast<size_t>(j)],
                                                   poses2[static_cast<size_t>(j)],
                                                   spec.multiview_rotation);
      acc = acc < 0 ? term : tape.add(acc, term);
    }
    lmv = tape.scale(acc, 1.0 / static_cast<double>(spec.n_out));
  }

  if (spec.use_adversarial) {
    lgen = model::tape_generator_adv_loss(tape, topo, config_.disc, disc_params_,
                                          spec.adv_rotation, poses);
    result.predicted.reserve(poses.size());
    for (int p : poses) result.predicted.push_back(pose_from_values(tape.values(p), k));
  }

  const int total = losses::tape_total_loss(tape, l3d, lmv, l2d, lgen, config_.weights);
  tape.backward(total);

  result.l3d = l3d >= 0 ? tape.scalar(l3d) : -1.0;
  result.lmv = lmv >= 0 ? tape.scalar(lmv) : -1.0;
  result.l2d = l2d >= 0 ? tape.scalar(l2d) : -1.0;
  result.lgen = lgen >= 0 ? tape.scalar(lgen) : -1.0;
  result.total = tape.scalar(total);
  return result;
}

void Trainer::discriminator_update(int step_index, EpochMetrics& metrics) {
  const Rng epoch_rng = Rng(config_.seed).fork(static_cast<std::uint64_t>(epoch_index_) + 1);
  Rng disc_rng = epoch_rng.fork(0x20000 + static_cast<std::uint64_t>(step_index));
  const int roll = adv_outputs_;
  const int window = config_.disc.window;
  const int half = config_.batch_size > 1 ? config_.batch_size / 2 : 1;

  nn::Tape tape;
  std::vector<int> logits_real, logits_fake;

  for (int i = 0; i < half; ++i) {
    // Real window: ground-truth 3D slice.
    const int seq_idx = static_cast<int>(disc_rng.uniform_int(static_cast<std::int64_t>(corpus_.size())));
    const auto& seq = corpus_[static_cast<size_t>(seq_idx)];
    const int max_start = static_cast<int>(seq.j3d.size()) - roll;
    const int start = static_cast<int>(disc_rng.uniform_int(max_start + 1));
    skeleton::PoseSequence3D slice(seq.j3d.begin() + start, seq.j3d.begin() + start + roll);
    const auto features = kcs::sequence_descriptor(slice, seq.topology, config_.disc.tkcs_interval);
    const Eigen::MatrixXd real_feats = features.per_frame.leftCols(window);
    const int f = tape.constant({config_.disc.feature_length, window}, to_row_major(real_feats));
    logits_real.push_back(model::tape_discriminator_logit(tape, config_.disc, disc_params_, f));

    // Fake window: the generator's current pose roll, detached (the forward
    // tape is discarded, features enter the disc tape as constants).
    const int fake_idx =
        static_cast<int>(disc_rng.uniform_int(static_cast<std::int64_t>(corpus_.size())));
    const auto& seq_f = corpus_[static_cast<size_t>(fake_idx)];
    const int t_in = config_.tcn.temporal_length + roll - 1;
    const int fake_max = static_cast<int>(seq_f.j3d.size()) - t_in;
    if (fake_max < 0) throw TrainError("sequence too short for adversarial roll");
    const int fake_start = static_cast<int>(disc_rng.uniform_int(fake_max + 1));
    const std::uint64_t fake_aug_seed = disc_rng.next_u64();

    skeleton::PoseSequence2D window_2d(seq_f.j2d.begin() + fake_start,
                                       seq_f.j2d.begin() + fake_start + t_in);
    aug::AugmentationConfig aug_cfg = config_.augmentation;
    aug_cfg.seed = fake_aug_seed;
    const auto pipeline = aug::apply_pipeline(aug_cfg, window_2d, seq_f.topology, config_.render);
    const Eigen::MatrixXd pooled =
        model::pool_heatmap_window(pipeline.heatmaps, config_.embedding.pool_factor);
    nn::Tape fwd;
    const int pooled_in =
        fwd.constant({static_cast<int>(pooled.rows()), t_in}, to_row_major(pooled));
    const int emb = model::tape_embed_window(fwd, config_.embedding, gen_params_, pooled_in);
    std::vector<int> poses;
    model::tape_pose_roll(fwd, config_.tcn, gen_params_, emb, roll, &poses);
    skeleton::PoseSequence3D predicted;
    predicted.reserve(poses.size());
    for (int p : poses) {
      predicted.push_back(pose_from_values(fwd.values(p), seq_f.topology.joint_count()));
    }
    const auto fake_desc =
        kcs::sequence_descriptor(predicted, seq_f.topology, config_.disc.tkcs_interval);
    const Eigen::MatrixXd fake_feats = fake_desc.per_frame.leftCols(window);
    const int ff =
        tape.constant({config_.disc.feature_length, window}, to_row_major(fake_feats));
    logits_fake.push_back(model::tape_discriminator_logit(tape, config_.disc, disc_params_, ff));
  }

  // BCE: real labeled 1, generated labeled 0.
  int acc = -1;
  for (int lr : logits_real) {
    const int term = losses::tape_neg_log_logistic(tape, lr);
    acc = acc < 0 ? term : tape.add(acc, term);
  }
  for (int lf : logits_fake) {
    const int term = tape.softplus(lf);  // -log(1 - sigmoid(z))
    acc = acc < 0 ? term : tape.add(acc, term);
  }
  const int loss = tape.scale(acc, 1.0 / static_cast<double>(logits_real.size() + logits_fake.size()));
  const double loss_value = tape.scalar(loss);
  if (!std::isfinite(loss_value)) throw TrainError("non-finite discriminator loss");

  disc_params_.zero_grads();
  tape.backward(loss);
  tape.collect_param_grads(disc_params_);
  nn::optimizer_step(disc_params_, disc_opt_state_);
  metrics.ldisc += loss_value;
  metrics.disc_updates += 1;
}

EpochMetrics Trainer::train_epoch() {
  EpochMetrics metrics;
  const Rng epoch_rng = Rng(config_.seed).fork(static_cast<std::uint64_t>(epoch_index_) + 1);
  const bool adversarial = config_.weights.w3 > 0.0;
  const bool multiview = config_.weights.w1 > 0.0;
  const int n_out = adversarial ? adv_outputs_ : 1;
  const int t_in = config_.tcn.temporal_length + n_out - 1;
  const int two_d_cutoff =
      static_cast<int>(config_.two_d_fraction * static_cast<double>(corpus_.size()));

  long l3d_count = 0, lmv_count = 0, l2d_count = 0, lgen_count = 0;

  for (int step = 0; step < config_.steps_per_epoch; ++step) {
    for (int d = 0; adversarial && d < config_.disc_steps; ++d) {
      discriminator_update(step * config_.disc_steps + d, metrics);
    }

    // Draw the whole batch plan in sample order.
    std::vector<SampleSpec> specs(static_cast<size_t>(config_.batch_size));
    for (int i = 0; i < config_.batch_size; ++i) {
      const std::uint64_t sample_index =
          static_cast<std::uint64_t>(step) * config_.batch_size + i;
      Rng sample_rng = epoch_rng.fork(0x10000 + sample_index);
      SampleSpec& spec = specs[static_cast<size_t>(i)];
      spec.sequence =
          static_cast<int>(sample_rng.uniform_int(static_cast<std::int64_t>(corpus_.size())));
      spec.two_d_only = spec.sequence < two_d_cutoff;
      spec.n_out = n_out;
      spec.t_in = t_in;
      const auto& seq = corpus_[static_cast<size_t>(spec.sequence)];
      const int max_start = static_cast<int>(seq.j3d.size()) - spec.t_in;
      if (max_start < 0) throw TrainError("sequence too short for training window");
      spec.window_start = static_cast<int>(sample_rng.uniform_int(max_start + 1));
      spec.aug_seed = sample_rng.fork(1).next_u64();
      if (multiview && !spec.two_d_only) {
        spec.use_multiview = true;
        Rng mv = sample_rng.fork(2);
        spec.multiview_rotation = losses::sample_pose_rotation(mv);
      }
      if (adversarial) {
        spec.use_adversarial = true;
        Rng adv = sample_rng.fork(3);
        spec.adv_rotation = losses::sample_pose_rotation(adv);
      }
    }

    // Forward/backward per sample, optionally across workers; reduction is
    // in fixed sample order either way.
    std::vector<SampleResult> results(specs.size());
    const int workers = std::max(1, config_.workers);
    if (workers == 1) {
      for (size_t i = 0; i < specs.size(); ++i) results[i] = run_generator_sample(specs[i]);
    } else {
      std::vector<std::thread> pool;
      std::atomic<size_t> next{0};
      for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          while (true) {
            const size_t i = next.fetch_add(1);
            if (i >= specs.size()) break;
            results[i] = run_generator_sample(specs[i]);
          }
        });
      }
      for (auto& t : pool) t.join();
    }

    gen_params_.zero_grads();
    for (size_t i = 0; i < results.size(); ++i) {
      auto& r = results[i];
      if (!std::isfinite(r.total)) {
        throw TrainError("non-finite loss at epoch " + std::to_string(epoch_index_) + " step " +
                         std::to_string(step) + " sample " + std::to_string(i));
      }
      r.tape->collect_param_grads(gen_params_);
      if (r.l3d >= 0) { metrics.l3d += r.l3d; ++l3d_count; }
      if (r.lmv >= 0) { metrics.lmv += r.lmv; ++lmv_count; }
      if (r.l2d >= 0) { metrics.l2d += r.l2d; ++l2d_count; }
      if (r.lgen >= 0) { metrics.lgen += r.lgen; ++lgen_count; }
      metrics.total += r.total;
      r.tape.reset();
    }
    const double inv_batch = 1.0 / static_cast<double>(config_.batch_size);
    for (auto& [name, tensor] : gen_params_.params) {
      for (auto& g : tensor.grad) g *= inv_batch;
    }
    nn::optimizer_step(gen_params_, gen_opt_state_);
    for (const auto& [name, tensor] : gen_params_.params) {
      for (double v : tensor.values) {
        if (!std::isfinite(v)) {
          throw TrainError("non-finite parameter \"" + name + "\" after step " +
                           std::to_string(step) + " of epoch " + std::to_string(epoch_index_));
        }
      }
    }
    metrics.gen_steps += 1;
  }

  const double steps = static_cast<double>(config_.steps_per_epoch * config_.batch_size);
  if (l3d_count > 0) metrics.l3d /= static_cast<double>(l3d_count);
  if (lmv_count > 0) metrics.lmv /= static_cast<double>(lmv_count);
  if (l2d_count > 0) metrics.l2d /= static_cast<double>(l2d_count);
  if (lgen_count > 0) metrics.lgen /= static_cast<double>(lgen_count);
  metrics.total /= steps;
  if (metrics.disc_updates > 0) metrics.ldisc /= static_cast<double>(metrics.disc_updates);
  ++epoch_index_;
  return metrics;
}

std::pair<skeleton::PoseSequence3D, std::vector<int>> Trainer::predict_sequence(
    const synthdata::SequenceData& data, const EvalOptions& options) const {
  const int t_len = config_.tcn.temporal_length;
  const int frames = static_cast<int>(data.j3d.size());
  const int center0 = t_len / 2;
  const int last_center = frames - t_len + center0;

  skeleton::PoseSequence3D predictions;
  std::vector<int> centers;
  for (int c = center0; c <= last_center; c += options.stride) {
    const int start = c - center0;
    skeleton::PoseSequence2D window_2d(data.j2d.begin() + start,
                                       data.j2d.begin() + start + t_len);
    heatmap::HeatmapSequence maps;
    maps.reserve(window_2d.size());
    for (const auto& pose : window_2d) {
      maps.push_back(heatmap::render_heatmaps(pose, config_.render.sigma, config_.render.height,
                                              config_.render.width));
    }
    if (options.point_occlusion_rate > 0.0) {
      Rng occ = Rng(options.occlusion_seed).fork(static_cast<std::uint64_t>(c) * 131 + 7);
      aug::MaskRecord unused;
      aug::occlude_keypoints(maps, options.point_occlusion_rate, occ, unused);
    }
    const Eigen::MatrixXd pooled = model::pool_heatmap_window(maps, config_.embedding.pool_factor);
    nn::Tape tape;
    const int pooled_in =
        tape.constant({static_cast<int>(pooled.rows()), t_len}, to_row_major(pooled));
    const int emb = model::tape_embed_window(tape, config_.embedding, gen_params_, pooled_in);
    std::vector<int> poses;
    model::tape_pose_roll(tape, config_.tcn, gen_params_, emb, 1, &poses);
    predictions.push_back(pose_from_values(tape.values(poses[0]), data.topology.joint_count()));
    centers.push_back(c);
  }
  return {std::move(predictions), std::move(centers)};
}

EvalReport Trainer::evaluate(const std::vector<synthdata::SequenceData>& eval_corpus,
                             const EvalOptions& options) const {
  skeleton::PoseSequence3D all_pred, all_gt;
  double bone_var_acc = 0.0;
  long bone_var_count = 0;
  for (const auto& data : eval_corpus) {
    auto [pred, centers] = predict_sequence(data, options);
    for (size_t i = 0; i < pred.size(); ++i) {
      all_pred.push_back(pred[i]);
      all_gt.push_back(data.j3d[static_cast<size_t>(centers[i])]);
    }
    if (pred.size() >= 2) {
      bone_var_acc += metrics::bone_length_variance(pred, data.topology);
      ++bone_var_count;
    }
  }
  if (all_pred.empty()) throw TrainError("evaluate: no complete windows in eval corpus");

  EvalReport report;
  report.mpjpe = metrics::mpjpe(all_pred, all_gt);
  report.p_mpjpe = metrics::p_mpjpe(all_pred, all_gt);
  report.pck150 = metrics::pck3d(all_pred, all_gt, 150.0);
  report.mae = metrics::mean_angle_error(all_pred, all_gt, eval_corpus.front().topology).mean_radians;
  report.frames = static_cast<long>(all_pred.size());
  report.bone_length_variance =
      bone_var_count > 0 ? bone_var_acc / static_cast<double>(bone_var_count) : 0.0;
  return report;
}

double Trainer::discriminator_window_score(const skeleton::PoseSequence3D& window_poses) const {
  const auto& topo = corpus_.front().topology;
  const auto desc = kcs::sequence_descriptor(window_poses, topo, config_.disc.tkcs_interval);
  const Eigen::MatrixXd feats = desc.per_frame.leftCols(config_.disc.window);
  return model::discriminator_score(feats, config_.disc, disc_params_);
}

void Trainer::load_params(const nn::ParamStore& merged) {
  for (const auto& [name, tensor] : merged.params) {
    nn::ParamStore& target = name.rfind("disc.", 0) == 0 ? disc_params_ : gen_params_;
    nn::Tensor& dst = target.at(name);
    if (dst.shape != tensor.shape) throw TrainError("checkpoint shape mismatch for " + name);
    dst.values = tensor.values;
  }
}

nn::ParamStore Trainer::merged_params() const {
  nn::ParamStore merged;
  for (const auto& [name, tensor] : gen_params_.params) merged.add(name, tensor);
  for (const auto& [name, tensor] : disc_params_.params) merged.add(name, tensor);
  return merged;
}

}  // namespace postcn::train
