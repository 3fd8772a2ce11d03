#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "postcn/skeleton.hpp"

namespace postcn::kcs {

// Spatial kinematic chain space descriptor Psi = B^T B (M x M, mm^2).
// Diagonal holds squared bone lengths, off-diagonals inter-bone inner
// products (length-weighted angles).
struct SpatialKcs {
  Eigen::MatrixXd psi;
};

// Temporal descriptor Phi = Psi_{t+interval} - Psi_t (mm^2). Diagonal holds
// squared-bone-length changes, off-diagonals angle-term changes.
struct TemporalKcs {
  Eigen::MatrixXd phi;
  int interval = 1;
};

// Per-frame discriminator features: upper triangle (incl. diagonal) of Psi,
// upper triangle of Phi, then the K x 3 coordinates row-major. Column t is
// the feature vector of frame t; length M(M+1) + 3K.
struct DiscriminatorFeatures {
  Eigen::MatrixXd per_frame;  // feature_length x T
  int interval = 1;
};

struct KcsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

SpatialKcs spatial_kcs(const skeleton::BoneMatrix& bones);

TemporalKcs temporal_kcs(const skeleton::BoneMatrix& bones_t,
                         const skeleton::BoneMatrix& bones_next, int interval);

int feature_length(const skeleton::SkeletonTopology& topology);

// Row-major upper-triangle (incl. diagonal) flat indices of an n x n matrix.
std::vector<int> upper_triangle_indices(int n);

// Frame t pairs with frame t+interval for its Phi block; the trailing
// `interval` frames reuse the last computable Phi. Requires
// seq.size() > interval.
DiscriminatorFeatures sequence_descriptor(const skeleton::PoseSequence3D& seq,
                                          const skeleton::SkeletonTopology& topology,
                                          int interval);

}  // namespace postcn::kcs
