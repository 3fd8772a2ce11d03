#pragma once

#include <Eigen/Dense>
#include <span>
#include <stdexcept>

#include "postcn/rng.hpp"
#include "postcn/skeleton.hpp"
#include "postcn/tape.hpp"

namespace postcn::losses {

struct LossError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Proper rotation: R^T R = I, det = +1.
struct CameraRotation {
  Eigen::Matrix3d mat = Eigen::Matrix3d::Identity();
};

struct LossWeights {
  double w1 = 0.5;   // multi-view
  double w2 = 0.1;   // 2D reprojection
  double w3 = 0.01;  // adversarial
};

// Orthographic camera: root-center, divide by mean bone length, then
//   u = center_u + pixels_per_unit * x_hat
//   v = center_v - pixels_per_unit * y_hat   (image v grows downward)
// Depth (z) is discarded.
struct ProjectionConfig {
  double pixels_per_unit = 6.0;
  double center_u = 32.0;
  double center_v = 32.0;
};

// R = Rz(gamma) * Ry(beta) * Rx(alpha).
CameraRotation rotation_matrix(double alpha, double beta, double gamma);

// Draws alpha, beta, gamma in that order: beta uniform on [-pi, pi], alpha
// and gamma uniform on [-0.2 pi, 0.2 pi].
CameraRotation sample_pose_rotation(Rng& rng);

bool is_valid_rotation(const CameraRotation& r, double tol = 1e-9);

// Mean squared coordinate difference over batch, joints, axes (mm^2).
double loss_3d(std::span<const skeleton::Pose3D> pred, std::span<const skeleton::Pose3D> gt);
double loss_3d(const skeleton::Pose3D& pred, const skeleton::Pose3D& gt);

// Mean squared difference between R*Xv1 and Xv2 (mm^2).
double loss_multiview(const skeleton::Pose3D& xv1, const skeleton::Pose3D& xv2,
                      const CameraRotation& r12);

skeleton::Pose2D orthographic_project(const skeleton::Pose3D& pose,
                                      const skeleton::SkeletonTopology& topology,
                                      const ProjectionConfig& projection);

struct Loss2DResult {
  double value = 0.0;
  bool all_invisible = false;
};

// Mean squared pixel difference over visible joints only (px^2).
Loss2DResult loss_2d(const skeleton::Pose3D& pose, const skeleton::Pose2D& target,
                     const skeleton::SkeletonTopology& topology,
                     const ProjectionConfig& projection);

// l3d + w1*lmv + w2*l2d + w3*lgen. Throws on non-finite components.
double total_loss(double l3d, double lmv, double l2d, double lgen, const LossWeights& weights);

// --- Tape builders (gradient-carrying counterparts) ---

// pose {K,3} -> pose * R^T (rows rotated).
int tape_rotate(nn::Tape& tape, int pose, const CameraRotation& r);

// Subtracts the root row from every joint row.
int tape_root_center(nn::Tape& tape, int pose, int root_index);

int tape_loss_3d(nn::Tape& tape, int pred, int gt);
int tape_loss_multiview(nn::Tape& tape, int xv1, int xv2, const CameraRotation& r12);
int tape_orthographic_project(nn::Tape& tape, int pose,
                              const skeleton::SkeletonTopology& topology,
                              const ProjectionConfig& projection);
// Returns a constant 0 node if no joint is visible.
int tape_loss_2d(nn::Tape& tape, int pose, const skeleton::Pose2D& target,
                 const skeleton::SkeletonTopology& topology, const ProjectionConfig& projection);
// -log(logistic(logit)), numerically stable.
int tape_neg_log_logistic(nn::Tape& tape, int logit);
// Pass -1 for absent components; they contribute 0.
int tape_total_loss(nn::Tape& tape, int l3d, int lmv, int l2d, int lgen,
                    const LossWeights& weights);

}  // namespace postcn::losses
