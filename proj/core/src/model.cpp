#include "postcn/model.hpp"

#include <cmath>

namespace postcn::model {

namespace {

std::vector<double> to_row_major(const Eigen::MatrixXd& m) {
  std::vector<double> out(static_cast<size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out[static_cast<size_t>(r * m.cols() + c)] = m(r, c);
    }
  }
  return out;
}

std::vector<double> glorot(std::int64_t count, double fan_in, double fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  std::vector<double> v(static_cast<size_t>(count));
  for (auto& x : v) x = rng.uniform(-limit, limit);
  return v;
}

constexpr std::array<int, 3> kDiscDilations = {1, 2, 4};

int disc_receptive_field() {
  int rf = 1;
  for (int d : kDiscDilations) rf += 2 * d;
  return rf;
}

}  // namespace

std::array<int, 3> branch_dilations(int stride, int temporal_length) {
  if (stride <= 0) throw ModelError("branch stride must be positive");
  // Largest receptive field whose center stays placeable at T/2.
  const int max_rf = temporal_length - 1;
  const int cap = (max_rf - 1) / 2 - 3 * stride;
  const int d3 = std::min(4 * stride, cap);
  if (d3 < 1) {
    throw ModelError("temporal length " + std::to_string(temporal_length) +
                     " too short for stride " + std::to_string(stride));
  }
  return {stride, 2 * stride, d3};
}

int receptive_field(const TcnConfig& config) {
  int rf = 0;
  for (int s : config.strides) {
    const auto d = branch_dilations(s, config.temporal_length);
    rf = std::max(rf, 1 + 2 * (d[0] + d[1] + d[2]));
  }
  return rf;
}

void validate_config(const EmbeddingNetConfig& embedding, const TcnConfig& tcn) {
  if (embedding.embed_dim <= 0) throw ModelError("embed_dim must be positive");
  if (embedding.height % embedding.pool_factor != 0 ||
      embedding.width % embedding.pool_factor != 0) {
    throw ModelError("pool factor must divide heatmap resolution");
  }
  if (embedding.embed_dim != tcn.embed_dim) throw ModelError("embedding dim mismatch");
  if (tcn.strides.empty()) throw ModelError("at least one stride branch required");
  std::vector<int> sorted = tcn.strides;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ModelError("strides must be distinct");
  }
  receptive_field(tcn);  // throws when a branch cannot fit
}

void init_embedding_params(const EmbeddingNetConfig& config, nn::ParamStore& store, Rng& rng) {
  const int p = config.pooled_size();
  store.add("embed.dense.weight",
            nn::Tensor({config.embed_dim, p}, glorot(static_cast<std::int64_t>(config.embed_dim) * p,
                                                     p, config.embed_dim, rng)));
  store.add("embed.dense.bias", nn::Tensor::zeros({config.embed_dim}));
}

void init_tcn_params(const TcnConfig& config, nn::ParamStore& store, Rng& rng) {
  const int c = config.branch_channels;
  for (size_t b = 0; b < config.strides.size(); ++b) {
    const std::string prefix = "tcn.branch" + std::to_string(b) + ".";
    int c_in = config.embed_dim;
    for (int layer = 0; layer < 3; ++layer) {
      const std::string name = prefix + "conv" + std::to_string(layer) + ".";
      store.add(name + "weight",
                nn::Tensor({c, c_in, 3},
                           glorot(static_cast<std::int64_t>(c) * c_in * 3, c_in * 3, c * 3, rng)));
      store.add(name + "bias", nn::Tensor::zeros({c}));
      c_in = c;
    }
  }
  const int concat = c * static_cast<int>(config.strides.size());
  const int out = 3 * config.joint_count;
  store.add("tcn.head.weight",
            nn::Tensor({out, concat},
                       glorot(static_cast<std::int64_t>(out) * concat, concat, out, rng)));
  store.add("tcn.head.bias", nn::Tensor::zeros({out}));
}

void init_discriminator_params(const DiscriminatorConfig& config, nn::ParamStore& store, Rng& rng) {
  if (config.window < disc_receptive_field()) {
    throw ModelError("discriminator window shorter than its receptive field");
  }
  const int c = config.channels;
  int c_in = config.feature_length;
  for (int layer = 0; layer < 3; ++layer) {
    const std::string name = "disc.conv" + std::to_string(layer) + ".";
    store.add(name + "weight",
              nn::Tensor({c, c_in, 3},
                         glorot(static_cast<std::int64_t>(c) * c_in * 3, c_in * 3, c * 3, rng)));
    store.add(name + "bias", nn::Tensor::zeros({c}));
    c_in = c;
  }
  store.add("disc.head.weight", nn::Tensor({1, c}, glorot(c, c, 1, rng)));
  store.add("disc.head.bias", nn::Tensor::zeros({1}));
}

Eigen::VectorXd pool_heatmap_stack(const heatmap::HeatmapStack& stack, int pool_factor) {
  const int ph = stack.height / pool_factor;
  const int pw = stack.width / pool_factor;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(stack.channels) * ph * pw);
  const double inv = 1.0 / (static_cast<double>(pool_factor) * pool_factor);
  for (int k = 0; k < stack.channels; ++k) {
    const double* ch = stack.channel(k);
    double* dst = out.data() + static_cast<Eigen::Index>(k) * ph * pw;
    for (int y = 0; y < stack.height; ++y) {
      const int py = y / pool_factor;
      for (int x = 0; x < stack.width; ++x) {
        dst[py * pw + x / pool_factor] += ch[y * stack.width + x] * inv;
      }
    }
  }
  return out;
}

Eigen::MatrixXd pool_heatmap_window(const heatmap::HeatmapSequence& window, int pool_factor) {
  if (window.empty()) throw ModelError("pool_heatmap_window: empty window");
  const auto first = pool_heatmap_stack(window.front(), pool_factor);
  Eigen::MatrixXd out(first.size(), static_cast<Eigen::Index>(window.size()));
  out.col(0) = first;
  for (size_t t = 1; t < window.size(); ++t) {
    out.col(static_cast<Eigen::Index>(t)) = pool_heatmap_stack(window[t], pool_factor);
  }
  return out;
}

int tape_embed_window(nn::Tape& tape, const EmbeddingNetConfig& config,
                      const nn::ParamStore& store, int pooled) {
  if (tape.shape(pooled)[0] != config.pooled_size()) {
    throw ModelError("tape_embed_window: pooled input size mismatch");
  }
  const int w = tape.param(store, "embed.dense.weight");
  const int b = tape.param(store, "embed.dense.bias");
  return tape.broadcast_add_col(tape.matmul(w, pooled), b);
}

int tape_pose_roll(nn::Tape& tape, const TcnConfig& config, const nn::ParamStore& store,
                   int embeddings, int n_out, std::vector<int>* poses) {
  const auto& in_shape = tape.shape(embeddings);
  if (in_shape.size() != 2 || in_shape[0] != config.embed_dim) {
    throw ModelError("tape_pose_roll: embeddings must be {embed_dim, T}");
  }
  const int t_in = in_shape[1];
  if (n_out < 1) throw ModelError("tape_pose_roll: n_out must be positive");
  const int c0 = roll_first_center(t_in, n_out);

  std::vector<int> branch_slices;
  for (size_t b = 0; b < config.strides.size(); ++b) {
    const auto dil = branch_dilations(config.strides[b], config.temporal_length);
    const int rf = 1 + 2 * (dil[0] + dil[1] + dil[2]);
    const int half = (rf - 1) / 2;
    if (c0 - half < 0 || c0 + n_out - 1 + half > t_in - 1) {
      throw ModelError("tape_pose_roll: window too short for branch receptive field");
    }
    const std::string prefix = "tcn.branch" + std::to_string(b) + ".";
    int h = embeddings;
    for (int layer = 0; layer < 3; ++layer) {
      const std::string name = prefix + "conv" + std::to_string(layer) + ".";
      h = tape.relu(tape.conv1d(h, tape.param(store, name + "weight"),
                                tape.param(store, name + "bias"), dil[layer]));
    }
    // Branch output column o covers input [o, o + rf - 1], centered o + half.
    branch_slices.push_back(tape.slice_cols(h, c0 - half, n_out));
  }

  const int concat = tape.concat_rows(branch_slices);
  const int head = tape.broadcast_add_col(
      tape.matmul(tape.param(store, "tcn.head.weight"), concat),
      tape.param(store, "tcn.head.bias"));

  if (poses != nullptr) {
    for (int j = 0; j < n_out; ++j) {
      const int col = tape.slice_cols(head, j, 1);
      const int pose = tape.reshape(col, {config.joint_count, 3});
      const int scaled = tape.scale(pose, config.output_scale_mm);
      poses->push_back(losses::tape_root_center(tape, scaled, config.root_index));
    }
  }
  return head;
}

int tape_pose_window_features(nn::Tape& tape, const skeleton::SkeletonTopology& topology,
                              int interval, const std::vector<int>& poses) {
  const int window = static_cast<int>(poses.size()) - interval;
  if (interval <= 0 || window <= 0) {
    throw ModelError("tape_pose_window_features: need window + interval poses");
  }
  const int m = topology.bone_count();
  const int k = topology.joint_count();
  const auto tri = kcs::upper_triangle_indices(m);
  std::vector<std::int64_t> tri64(tri.begin(), tri.end());

  const int incidence =
      tape.constant({m, k}, to_row_major(skeleton::bone_incidence(topology)));
  std::vector<int> psis;
  psis.reserve(poses.size());
  for (int p : poses) {
    const int bones = tape.matmul(incidence, p);  // {M, 3}, rows are bone vectors
    psis.push_back(tape.matmul(bones, bones, false, true));
  }

  std::vector<int> frames;
  frames.reserve(static_cast<size_t>(window));
  for (int t = 0; t < window; ++t) {
    const int psi_flat = tape.gather(psis[static_cast<size_t>(t)], tri64);
    const int phi = tape.sub(psis[static_cast<size_t>(t + interval)], psis[static_cast<size_t>(t)]);
    const int phi_flat = tape.gather(phi, tri64);
    const int coords = tape.reshape(poses[static_cast<size_t>(t)], {3 * k});
    frames.push_back(tape.reshape(tape.concat_vec({psi_flat, phi_flat, coords}),
                                  {m * (m + 1) + 3 * k, 1}));
  }
  return tape.concat_cols(frames);
}

int tape_discriminator_logit(nn::Tape& tape, const DiscriminatorConfig& config,
                             const nn::ParamStore& store, int features) {
  const auto& shape = tape.shape(features);
  if (shape.size() != 2 || shape[0] != config.feature_length || shape[1] != config.window) {
    throw ModelError("tape_discriminator_logit: features must be {feature_length, window}");
  }
  // Feature layout is [tri(psi) | tri(phi) | 3K coords]; the kcs blocks and
  // the coordinate block carry different units and get their own scales.
  std::vector<double> scales(static_cast<size_t>(config.feature_length) * config.window);
  const int kcs_rows = config.feature_length - config.coord_block_rows;
  for (int r = 0; r < config.feature_length; ++r) {
    const double s = r < kcs_rows ? config.kcs_feature_scale : config.coord_feature_scale;
    for (int c = 0; c < config.window; ++c) {
      scales[static_cast<size_t>(r) * config.window + c] = s;
    }
  }
  int h = tape.hadamard(features,
                        tape.constant({config.feature_length, config.window}, std::move(scales)));
  for (int layer = 0; layer < 3; ++layer) {
    const std::string name = "disc.conv" + std::to_string(layer) + ".";
    h = tape.relu(tape.conv1d(h, tape.param(store, name + "weight"),
                              tape.param(store, name + "bias"), kDiscDilations[layer]));
  }
  const int t_out = tape.shape(h)[1];
  std::vector<double> mean_w(static_cast<size_t>(t_out), 1.0 / static_cast<double>(t_out));
  const int pooled = tape.matmul(h, tape.constant({t_out, 1}, std::move(mean_w)));  // {C, 1}
  const int logit = tape.add(tape.matmul(tape.param(store, "disc.head.weight"), pooled),
                             tape.reshape(tape.param(store, "disc.head.bias"), {1, 1}));
  return tape.reshape(logit, {1});
}

int tape_generator_adv_loss(nn::Tape& tape, const skeleton::SkeletonTopology& topology,
                            const DiscriminatorConfig& config, const nn::ParamStore& disc_store,
                            const losses::CameraRotation& rotation,
                            const std::vector<int>& poses) {
  std::vector<int> rotated;
  rotated.reserve(poses.size());
  for (int p : poses) rotated.push_back(losses::tape_rotate(tape, p, rotation));
  const int features = tape_pose_window_features(tape, topology, config.tkcs_interval, rotated);
  const int logit = tape_discriminator_logit(tape, config, disc_store, features);
  return losses::tape_neg_log_logistic(tape, logit);
}

Eigen::VectorXd embed(const heatmap::HeatmapStack& stack, const EmbeddingNetConfig& config,
                      const nn::ParamStore& store) {
  if (stack.channels != config.channels || stack.height != config.height ||
      stack.width != config.width) {
    throw ModelError("embed: heatmap stack shape mismatch");
  }
  const Eigen::VectorXd pooled = pool_heatmap_stack(stack, config.pool_factor);
  nn::Tape tape;
  const int in = tape.constant({config.pooled_size(), 1},
                               std::vector<double>(pooled.data(), pooled.data() + pooled.size()));
  const int out = tape_embed_window(tape, config, store, in);
  const auto v = tape.values(out);
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

skeleton::Pose3D forward_pose(const Eigen::MatrixXd& embeddings, const TcnConfig& config,
                              const nn::ParamStore& store) {
  if (embeddings.cols() != config.temporal_length) {
    throw ModelError("forward_pose: window length must equal temporal_length");
  }
  nn::Tape tape;
  const int in = tape.constant({static_cast<int>(embeddings.rows()),
                                static_cast<int>(embeddings.cols())},
                               to_row_major(embeddings));
  std::vector<int> poses;
  tape_pose_roll(tape, config, store, in, 1, &poses);
  const auto v = tape.values(poses[0]);
  skeleton::Pose3D out;
  out.coords.resize(config.joint_count, 3);
  for (int j = 0; j < config.joint_count; ++j) {
    for (int a = 0; a < 3; ++a) out.coords(j, a) = v[static_cast<size_t>(3 * j + a)];
  }
  return out;
}

double discriminator_score(const Eigen::MatrixXd& features, const DiscriminatorConfig& config,
                           const nn::ParamStore& store) {
  nn::Tape tape;
  const int in = tape.constant({static_cast<int>(features.rows()),
                                static_cast<int>(features.cols())},
                               to_row_major(features));
  const int logit = tape_discriminator_logit(tape, config, store, in);
  const int prob = tape.logistic(logit);
  return tape.scalar(prob);
}

}  // namespace postcn::model
