#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace postcn::skeleton {

// Kinematic model: K joints connected by M = K-1 directed bones forming a
// tree rooted at root_index. Symmetry pairs map left-side joints to their
// right-side counterparts (used by the swap augmentation).
struct SkeletonTopology {
  std::vector<std::string> joint_names;
  std::vector<std::pair<int, int>> bones;           // (parent, child)
  std::vector<std::pair<int, int>> symmetry_pairs;  // (left, right)
  int root_index = 0;

  int joint_count() const { return static_cast<int>(joint_names.size()); }
  int bone_count() const { return static_cast<int>(bones.size()); }
};

// Root-relative 3D pose, millimeters. Row k = (x, y, z) of joint k.
struct Pose3D {
  Eigen::Matrix<double, Eigen::Dynamic, 3> coords;

  int joint_count() const { return static_cast<int>(coords.rows()); }
};

// Pixel-space 2D pose. Invisible joints keep coordinates but are excluded
// from losses and render to all-zero heatmap channels.
struct Pose2D {
  Eigen::Matrix<double, Eigen::Dynamic, 2> coords;
  std::vector<std::uint8_t> visibility;  // 1 = visible

  int joint_count() const { return static_cast<int>(coords.rows()); }
  bool visible(int k) const { return visibility[static_cast<size_t>(k)] != 0; }
};

using PoseSequence3D = std::vector<Pose3D>;
using PoseSequence2D = std::vector<Pose2D>;

// 3 x M bone matrix; column m = child coordinate - parent coordinate, mm.
struct BoneMatrix {
  Eigen::Matrix<double, 3, Eigen::Dynamic> columns;

  int bone_count() const { return static_cast<int>(columns.cols()); }
};

struct TopologyError : std::runtime_error {
  enum class Code { CycleDetected, DisconnectedJoint, BadSymmetryPair, BoneCountMismatch };
  TopologyError(Code c, const std::string& what) : std::runtime_error(what), code(c) {}
  Code code;
};

// The 17-joint Human3.6M convention (pelvis root, 16 bones).
const SkeletonTopology& default_topology();

// Checks the tree/symmetry invariants and returns the topology unchanged.
// Throws TopologyError otherwise.
const SkeletonTopology& validate_topology(const SkeletonTopology& topology);

BoneMatrix bones_from_pose(const Pose3D& pose, const SkeletonTopology& topology);

// Euclidean norm of each bone column, mm.
Eigen::VectorXd bone_lengths(const BoneMatrix& bones);

// M x K incidence matrix C with C(m, child)=+1, C(m, parent)=-1 so that
// (C * coords) rows are the bone vectors. Shared by the plain and the
// autodiff bone extraction paths.
Eigen::MatrixXd bone_incidence(const SkeletonTopology& topology);

// JSON form: {"joints": [...], "bones": [[p,c],...], "symmetry": [[l,r],...], "root": i}
std::string topology_to_json_text(const SkeletonTopology& topology);
SkeletonTopology topology_from_json_text(const std::string& text);

}  // namespace postcn::skeleton
