#include "postcn/skeleton.hpp"

#include <json.hpp>

#include <queue>

namespace postcn::skeleton {

const SkeletonTopology& default_topology() {
  static const SkeletonTopology topo = [] {
    SkeletonTopology t;
    t.joint_names = {
        "pelvis",                                        // 0
        "right_hip", "right_knee", "right_ankle",        // 1..3
        "left_hip", "left_knee", "left_ankle",           // 4..6
        "spine", "thorax", "neck", "head",               // 7..10
        "left_shoulder", "left_elbow", "left_wrist",     // 11..13
        "right_shoulder", "right_elbow", "right_wrist",  // 14..16
    };
    t.bones = {
        {0, 1},  {1, 2},   {2, 3},                      // right leg
        {0, 4},  {4, 5},   {5, 6},                      // left leg
        {0, 7},  {7, 8},   {8, 9},  {9, 10},            // torso/head
        {8, 11}, {11, 12}, {12, 13},                    // left arm
        {8, 14}, {14, 15}, {15, 16},                    // right arm
    };
    t.symmetry_pairs = {{4, 1}, {5, 2}, {6, 3}, {11, 14}, {12, 15}, {13, 16}};
    t.root_index = 0;
    return t;
  }();
  return topo;
}

const SkeletonTopology& validate_topology(const SkeletonTopology& topology) {
  const int k = topology.joint_count();
  const int m = topology.bone_count();
  if (k < 2) {
    throw TopologyError(TopologyError::Code::DisconnectedJoint, "topology needs at least two joints");
  }
  if (m != k - 1) {
    throw TopologyError(TopologyError::Code::BoneCountMismatch,
                        "bone count " + std::to_string(m) + " != joints-1 = " + std::to_string(k - 1));
  }
  if (topology.root_index < 0 || topology.root_index >= k) {
    throw TopologyError(TopologyError::Code::DisconnectedJoint, "root index out of range");
  }

  std::vector<int> parent(static_cast<size_t>(k), -1);
  std::vector<std::vector<int>> children(static_cast<size_t>(k));
  for (const auto& [p, c] : topology.bones) {
    if (p < 0 || p >= k || c < 0 || c >= k) {
      throw TopologyError(TopologyError::Code::DisconnectedJoint, "bone endpoint out of range");
    }
    if (p == c) {
      throw TopologyError(TopologyError::Code::CycleDetected,
                          "self-loop bone at joint " + std::to_string(p));
    }
    if (c == topology.root_index) {
      throw TopologyError(TopologyError::Code::CycleDetected, "root joint has a parent");
    }
    if (parent[static_cast<size_t>(c)] != -1) {
      throw TopologyError(TopologyError::Code::CycleDetected,
                          "joint " + std::to_string(c) + " has two parents");
    }
    parent[static_cast<size_t>(c)] = p;
    children[static_cast<size_t>(p)].push_back(c);
  }

  // BFS from the root must reach every joint; with M = K-1 edges and unique
  // parents that also rules out cycles.
  std::vector<char> seen(static_cast<size_t>(k), 0);
  std::queue<int> queue;
  queue.push(topology.root_index);
  seen[static_cast<size_t>(topology.root_index)] = 1;
  int reached = 0;
  while (!queue.empty()) {
    const int j = queue.front();
    queue.pop();
    ++reached;
    for (int c : children[static_cast<size_t>(j)]) {
      if (!seen[static_cast<size_t>(c)]) {
        seen[static_cast<size_t>(c)] = 1;
        queue.push(c);
      }
    }
  }
  if (reached != k) {
    throw TopologyError(TopologyError::Code::DisconnectedJoint,
                        "bone tree does not span all joints");
  }

  for (const auto& [l, r] : topology.symmetry_pairs) {
    if (l < 0 || l >= k || r < 0 || r >= k || l == r) {
      throw TopologyError(TopologyError::Code::BadSymmetryPair, "symmetry pair out of range");
    }
    const std::string& ln = topology.joint_names[static_cast<size_t>(l)];
    const std::string& rn = topology.joint_names[static_cast<size_t>(r)];
    if (ln.rfind("left", 0) != 0 || rn.rfind("right", 0) != 0) {
      throw TopologyError(TopologyError::Code::BadSymmetryPair,
                          "symmetry pair (" + ln + ", " + rn + ") is not left/right named");
    }
  }
  return topology;
}

BoneMatrix bones_from_pose(const Pose3D& pose, const SkeletonTopology& topology) {
  BoneMatrix b;
  b.columns.resize(3, topology.bone_count());
  for (int m = 0; m < topology.bone_count(); ++m) {
    const auto& [p, c] = topology.bones[static_cast<size_t>(m)];
    b.columns.col(m) = (pose.coords.row(c) - pose.coords.row(p)).transpose();
  }
  return b;
}

Eigen::VectorXd bone_lengths(const BoneMatrix& bones) {
  return bones.columns.colwise().norm();
}

Eigen::MatrixXd bone_incidence(const SkeletonTopology& topology) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(topology.bone_count(), topology.joint_count());
  for (int m = 0; m < topology.bone_count(); ++m) {
    const auto& [p, ch] = topology.bones[static_cast<size_t>(m)];
    c(m, p) = -1.0;
    c(m, ch) = 1.0;
  }
  return c;
}

std::string topology_to_json_text(const SkeletonTopology& topology) {
  nlohmann::ordered_json j;
  j["joints"] = topology.joint_names;
  j["bones"] = nlohmann::ordered_json::array();
  for (const auto& [p, c] : topology.bones) j["bones"].push_back({p, c});
  j["symmetry"] = nlohmann::ordered_json::array();
  for (const auto& [l, r] : topology.symmetry_pairs) j["symmetry"].push_back({l, r});
  j["root"] = topology.root_index;
  return j.dump();
}

SkeletonTopology topology_from_json_text(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  SkeletonTopology t;
  t.joint_names = j.at("joints").get<std::vector<std::string>>();
  for (const auto& bone : j.at("bones")) {
    t.bones.emplace_back(bone.at(0).get<int>(), bone.at(1).get<int>());
  }
  for (const auto& pair : j.at("symmetry")) {
    t.symmetry_pairs.emplace_back(pair.at(0).get<int>(), pair.at(1).get<int>());
  }
  t.root_index = j.at("root").get<int>();
  return t;
}

}  // namespace postcn::skeleton
