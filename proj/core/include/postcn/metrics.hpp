#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "postcn/skeleton.hpp"

namespace postcn::metrics {

struct MetricsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Least-squares similarity: minimizes sum ||scale * rotation * p + translation - g||^2.
struct SimilarityTransform {
  double scale = 1.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};

double mpjpe(const skeleton::Pose3D& pred, const skeleton::Pose3D& gt);
double mpjpe(const skeleton::PoseSequence3D& pred, const skeleton::PoseSequence3D& gt);

struct ProcrustesResult {
  skeleton::Pose3D aligned;
  SimilarityTransform transform;
};

// Closed-form similarity alignment (cross-covariance SVD with reflection
// correction, det(R) = +1). Throws MetricsError on coincident or collinear
// joints.
ProcrustesResult procrustes_align(const skeleton::Pose3D& pred, const skeleton::Pose3D& gt);

// MPJPE after per-frame procrustes_align (Protocol #2 style, includes
// uniform scale).
double p_mpjpe(const skeleton::PoseSequence3D& pred, const skeleton::PoseSequence3D& gt);

// Percentage of joints with 3D error strictly under `threshold_mm`.
double pck3d(const skeleton::PoseSequence3D& pred, const skeleton::PoseSequence3D& gt,
             double threshold_mm = 150.0);

struct AngleErrorResult {
  double mean_radians = 0.0;
  long skipped_bones = 0;  // zero-length on either side
};

// Mean angle between predicted and ground-truth bone directions.
AngleErrorResult mean_angle_error(const skeleton::PoseSequence3D& pred,
                                  const skeleton::PoseSequence3D& gt,
                                  const skeleton::SkeletonTopology& topology);

// Mean over bones of the temporal variance of bone length (mm^2); a
// consistency measure for predicted sequences.
double bone_length_variance(const skeleton::PoseSequence3D& seq,
                            const skeleton::SkeletonTopology& topology);

}  // namespace postcn::metrics
