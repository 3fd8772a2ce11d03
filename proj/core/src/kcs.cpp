#include "postcn/kcs.hpp"

namespace postcn::kcs {

SpatialKcs spatial_kcs(const skeleton::BoneMatrix& bones) {
  SpatialKcs out;
  out.psi = bones.columns.transpose() * bones.columns;
  return out;
}

TemporalKcs temporal_kcs(const skeleton::BoneMatrix& bones_t,
                         const skeleton::BoneMatrix& bones_next, int interval) {
  if (bones_t.bone_count() != bones_next.bone_count()) {
    throw KcsError("temporal_kcs: bone count mismatch");
  }
  if (interval <= 0) {
    throw KcsError("temporal_kcs: interval must be positive");
  }
  TemporalKcs out;
  out.phi = bones_next.columns.transpose() * bones_next.columns -
            bones_t.columns.transpose() * bones_t.columns;
  out.interval = interval;
  return out;
}

int feature_length(const skeleton::SkeletonTopology& topology) {
  const int m = topology.bone_count();
  const int k = topology.joint_count();
  return m * (m + 1) + 3 * k;
}

std::vector<int> upper_triangle_indices(int n) {
  std::vector<int> idx;
  idx.reserve(static_cast<size_t>(n) * static_cast<size_t>(n + 1) / 2);
  for (int r = 0; r < n; ++r) {
    for (int c = r; c < n; ++c) idx.push_back(r * n + c);
  }
  return idx;
}

namespace {

void flatten_upper(const Eigen::MatrixXd& mat, const std::vector<int>& idx,
                   Eigen::Ref<Eigen::VectorXd> out) {
  const int n = static_cast<int>(mat.rows());
  for (size_t i = 0; i < idx.size(); ++i) {
    const int r = idx[i] / n;
    const int c = idx[i] % n;
    out(static_cast<Eigen::Index>(i)) = mat(r, c);
  }
}

}  // namespace

DiscriminatorFeatures sequence_descriptor(const skeleton::PoseSequence3D& seq,
                                          const skeleton::SkeletonTopology& topology,
                                          int interval) {
  const int t_len = static_cast<int>(seq.size());
  if (interval <= 0) throw KcsError("sequence_descriptor: interval must be positive");
  if (t_len <= interval) throw KcsError("sequence_descriptor: sequence too short for interval");

  const int m = topology.bone_count();
  const int k = topology.joint_count();
  const int tri = m * (m + 1) / 2;
  const auto idx = upper_triangle_indices(m);

  std::vector<Eigen::MatrixXd> psis;
  psis.reserve(static_cast<size_t>(t_len));
  for (const auto& pose : seq) {
    psis.push_back(spatial_kcs(skeleton::bones_from_pose(pose, topology)).psi);
  }

  DiscriminatorFeatures out;
  out.interval = interval;
  out.per_frame.resize(feature_length(topology), t_len);
  for (int t = 0; t < t_len; ++t) {
    const int pair = std::min(t, t_len - 1 - interval);  // boundary: reuse last Phi
    const Eigen::MatrixXd phi = psis[static_cast<size_t>(pair + interval)] -
                                psis[static_cast<size_t>(pair)];
    auto col = out.per_frame.col(t);
    flatten_upper(psis[static_cast<size_t>(t)], idx, col.segment(0, tri));
    flatten_upper(phi, idx, col.segment(tri, tri));
    for (int j = 0; j < k; ++j) {
      col.segment(2 * tri + 3 * j, 3) = seq[static_cast<size_t>(t)].coords.row(j).transpose();
    }
  }
  return out;
}

}  // namespace postcn::kcs
