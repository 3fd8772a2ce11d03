#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "postcn/heatmap.hpp"
#include "postcn/kcs.hpp"
#include "postcn/losses.hpp"
#include "postcn/rng.hpp"
#include "postcn/skeleton.hpp"
#include "postcn/tape.hpp"

namespace postcn::model {

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Heatmap embedding f_E: fixed strided average-pooling of each channel down
// to (H/pool, W/pool), then one dense layer to embed_dim.
struct EmbeddingNetConfig {
  int channels = 17;
  int height = 64;
  int width = 64;
  int pool_factor = 8;
  int embed_dim = 512;

  int pooled_size() const {
    return channels * (height / pool_factor) * (width / pool_factor);
  }
};

// Multi-branch temporal convolutional pose regressor. Each stride-s branch
// is three valid dilated convolutions (k=3, dilations s, 2s, min(4s, cap))
// where the cap keeps every branch's receptive field placeable at the
// window center. Branch features concatenate into a dense head emitting
// K x 3 coordinates, scaled by output_scale_mm and root-centered.
struct TcnConfig {
  std::vector<int> strides = {1, 2, 3, 5, 7};
  int temporal_length = 64;
  int embed_dim = 512;
  int branch_channels = 48;
  int joint_count = 17;
  int root_index = 0;
  double output_scale_mm = 100.0;
};

// TCN discriminator over per-frame KCS/TKCS/coordinate features. Inputs are
// scaled by the fixed feature constants below as preprocessing; three valid
// dilated convolutions (dilations 1,2,4), relu, temporal mean pool, dense to
// one logit.
struct DiscriminatorConfig {
  int feature_length = 323;  // M(M+1) + 3K of the default topology
  int coord_block_rows = 51;  // trailing 3K coordinate rows of each feature
  int window = 16;
  int channels = 32;
  int tkcs_interval = 1;
  double kcs_feature_scale = 1e-4;    // psi/phi blocks, mm^2 -> O(1)
  double coord_feature_scale = 1e-3;  // coordinate block, mm -> O(1)
};

// Dilations of one stride-s branch; throws when the plan cannot fit the
// temporal length.
std::array<int, 3> branch_dilations(int stride, int temporal_length);

// Max over branches of 1 + sum (k-1) * dilation.
int receptive_field(const TcnConfig& config);

// Validates shape compatibility and that every branch fits; throws ModelError.
void validate_config(const EmbeddingNetConfig& embedding, const TcnConfig& tcn);

// Parameter creation, fixed order, Glorot-uniform weights / zero biases.
void init_embedding_params(const EmbeddingNetConfig& config, nn::ParamStore& store, Rng& rng);
void init_tcn_params(const TcnConfig& config, nn::ParamStore& store, Rng& rng);
void init_discriminator_params(const DiscriminatorConfig& config, nn::ParamStore& store, Rng& rng);

// Fixed pooling applied outside the tape (no parameters upstream of it).
// Column t is the pooled, flattened frame t.
Eigen::MatrixXd pool_heatmap_window(const heatmap::HeatmapSequence& window, int pool_factor);
Eigen::VectorXd pool_heatmap_stack(const heatmap::HeatmapStack& stack, int pool_factor);

// --- Tape builders ---

// pooled {P, T} -> embeddings {E, T}.
int tape_embed_window(nn::Tape& tape, const EmbeddingNetConfig& config,
                      const nn::ParamStore& store, int pooled);

// Input frame index of the first of n_out consecutive outputs; a single
// output sits at t_in / 2.
inline int roll_first_center(int t_in, int n_out) { return t_in / 2 - (n_out - 1) / 2; }

// embeddings {E, T_in} -> head output {3K, n_out}. Output j is the pose whose
// receptive field centers on input frame roll_first_center(T_in, n_out) + j;
// requires every branch receptive field to fit around those centers.
// Per-output pose handles ({K,3}, mm, root-centered) are appended to `poses`
// when non-null.
int tape_pose_roll(nn::Tape& tape, const TcnConfig& config, const nn::ParamStore& store,
                   int embeddings, int n_out, std::vector<int>* poses);

// Raw (unscaled) discriminator features of `window + interval` pose handles;
// returns {feature_length, window}. Mirrors kcs::sequence_descriptor on the
// first `window` frames.
int tape_pose_window_features(nn::Tape& tape, const skeleton::SkeletonTopology& topology,
                              int interval, const std::vector<int>& poses);

// features {F, window} -> scalar logit.
int tape_discriminator_logit(nn::Tape& tape, const DiscriminatorConfig& config,
                             const nn::ParamStore& store, int features);

// Adversarial generator loss -log D(features(R * poses)). `poses` must hold
// window + interval handles.
int tape_generator_adv_loss(nn::Tape& tape, const skeleton::SkeletonTopology& topology,
                            const DiscriminatorConfig& config, const nn::ParamStore& disc_store,
                            const losses::CameraRotation& rotation,
                            const std::vector<int>& poses);

// --- Plain forward wrappers ---

Eigen::VectorXd embed(const heatmap::HeatmapStack& stack, const EmbeddingNetConfig& config,
                      const nn::ParamStore& store);

// Window of exactly temporal_length embedding columns -> center-frame pose.
skeleton::Pose3D forward_pose(const Eigen::MatrixXd& embeddings, const TcnConfig& config,
                              const nn::ParamStore& store);

// Probability in (0,1) that the feature window is a real sequence.
double discriminator_score(const Eigen::MatrixXd& features, const DiscriminatorConfig& config,
                           const nn::ParamStore& store);

}  // namespace postcn::model
