#include "postcn/losses.hpp"

#include <cmath>

namespace postcn::losses {

namespace {

constexpr double kScaleFloor = 1e-6;  // mm; keeps the projection finite for collapsed poses

std::vector<double> matrix_to_row_major(const Eigen::MatrixXd& m) {
  std::vector<double> out(static_cast<size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out[static_cast<size_t>(r * m.cols() + c)] = m(r, c);
    }
  }
  return out;
}

}  // namespace

CameraRotation rotation_matrix(double alpha, double beta, double gamma) {
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  const double cb = std::cos(beta), sb = std::sin(beta);
  const double cg = std::cos(gamma), sg = std::sin(gamma);
  Eigen::Matrix3d rx, ry, rz;
  rx << 1, 0, 0, 0, ca, -sa, 0, sa, ca;
  ry << cb, 0, sb, 0, 1, 0, -sb, 0, cb;
  rz << cg, -sg, 0, sg, cg, 0, 0, 0, 1;
  CameraRotation out;
  out.mat = rz * ry * rx;
  return out;
}

CameraRotation sample_pose_rotation(Rng& rng) {
  const double alpha = rng.uniform(-0.2 * M_PI, 0.2 * M_PI);
  const double beta = rng.uniform(-M_PI, M_PI);
  const double gamma = rng.uniform(-0.2 * M_PI, 0.2 * M_PI);
  return rotation_matrix(alpha, beta, gamma);
}

bool is_valid_rotation(const CameraRotation& r, double tol) {
  const Eigen::Matrix3d gram = r.mat.transpose() * r.mat;
  return (gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(r.mat.determinant() - 1.0) <= tol;
}

double loss_3d(const skeleton::Pose3D& pred, const skeleton::Pose3D& gt) {
  if (pred.coords.rows() != gt.coords.rows()) throw LossError("loss_3d: shape mismatch");
  return (pred.coords - gt.coords).squaredNorm() / static_cast<double>(pred.coords.size());
}

double loss_3d(std::span<const skeleton::Pose3D> pred, std::span<const skeleton::Pose3D> gt) {
  if (pred.size() != gt.size() || pred.empty()) throw LossError("loss_3d: batch mismatch");
  double acc = 0.0;
  std::int64_t count = 0;
  for (size_t i = 0; i < pred.size(); ++i) {
    if (pred[i].coords.rows() != gt[i].coords.rows()) throw LossError("loss_3d: shape mismatch");
    acc += (pred[i].coords - gt[i].coords).squaredNorm();
    count += pred[i].coords.size();
  }
  return acc / static_cast<double>(count);
}

double loss_multiview(const skeleton::Pose3D& xv1, const skeleton::Pose3D& xv2,
                      const CameraRotation& r12) {
  if (xv1.coords.rows() != xv2.coords.rows()) throw LossError("loss_multiview: shape mismatch");
  if (!is_valid_rotation(r12)) throw LossError("loss_multiview: invalid rotation");
  const Eigen::MatrixXd rotated = xv1.coords * r12.mat.transpose();
  return (rotated - xv2.coords).squaredNorm() / static_cast<double>(xv1.coords.size());
}

skeleton::Pose2D orthographic_project(const skeleton::Pose3D& pose,
                                      const skeleton::SkeletonTopology& topology,
                                      const ProjectionConfig& projection) {
  const int k = pose.joint_count();
  Eigen::Matrix<double, Eigen::Dynamic, 3> centered = pose.coords;
  centered.rowwise() -= pose.coords.row(topology.root_index);
  // The skeleton scale comes from the depth-dropped bones so the projection
  // is exactly depth-invariant.
  const auto bones = skeleton::bones_from_pose({centered}, topology);
  const double scale = bones.columns.topRows(2).colwise().norm().mean() + kScaleFloor;

  skeleton::Pose2D out;
  out.coords.resize(k, 2);
  out.visibility.assign(static_cast<size_t>(k), 1);
  for (int j = 0; j < k; ++j) {
    out.coords(j, 0) = projection.center_u + projection.pixels_per_unit * centered(j, 0) / scale;
    out.coords(j, 1) = projection.center_v - projection.pixels_per_unit * centered(j, 1) / scale;
  }
  return out;
}

Loss2DResult loss_2d(const skeleton::Pose3D& pose, const skeleton::Pose2D& target,
                     const skeleton::SkeletonTopology& topology,
                     const ProjectionConfig& projection) {
  if (pose.joint_count() != target.joint_count()) throw LossError("loss_2d: shape mismatch");
  const skeleton::Pose2D projected = orthographic_project(pose, topology, projection);
  double acc = 0.0;
  int visible = 0;
  for (int j = 0; j < target.joint_count(); ++j) {
    if (!target.visible(j)) continue;
    acc += (projected.coords.row(j) - target.coords.row(j)).squaredNorm();
    ++visible;
  }
  if (visible == 0) return {0.0, true};
  return {acc / static_cast<double>(2 * visible), false};
}

double total_loss(double l3d, double lmv, double l2d, double lgen, const LossWeights& weights) {
  for (double v : {l3d, lmv, l2d, lgen}) {
    if (!std::isfinite(v)) throw LossError("total_loss: non-finite component");
  }
  return l3d + weights.w1 * lmv + weights.w2 * l2d + weights.w3 * lgen;
}

int tape_rotate(nn::Tape& tape, int pose, const CameraRotation& r) {
  const int rot = tape.constant({3, 3}, matrix_to_row_major(r.mat));
  return tape.matmul(pose, rot, false, true);
}

int tape_root_center(nn::Tape& tape, int pose, int root_index) {
  const int k = tape.shape(pose)[0];
  // (I - 1 e_root^T) X subtracts the root row from every row.
  Eigen::MatrixXd centering = Eigen::MatrixXd::Identity(k, k);
  centering.col(root_index).array() -= 1.0;
  const int cm = tape.constant({k, k}, matrix_to_row_major(centering));
  return tape.matmul(cm, pose);
}

int tape_loss_3d(nn::Tape& tape, int pred, int gt) { return tape.mse(pred, gt); }

int tape_loss_multiview(nn::Tape& tape, int xv1, int xv2, const CameraRotation& r12) {
  if (!is_valid_rotation(r12)) throw LossError("tape_loss_multiview: invalid rotation");
  return tape.mse(tape_rotate(tape, xv1, r12), xv2);
}

int tape_orthographic_project(nn::Tape& tape, int pose,
                              const skeleton::SkeletonTopology& topology,
                              const ProjectionConfig& projection) {
  const int k = topology.joint_count();
  const int m = topology.bone_count();
  const int centered = tape_root_center(tape, pose, topology.root_index);

  const int incidence =
      tape.constant({m, k}, matrix_to_row_major(skeleton::bone_incidence(topology)));
  const int bones = tape.matmul(incidence, centered);              // {M, 3}
  // Depth-dropped bone lengths, so the projection ignores z exactly.
  const int bones_xy = tape.slice_cols(bones, 0, 2);               // {M, 2}
  const int sq = tape.hadamard(bones_xy, bones_xy);
  const int ones2 = tape.constant({2, 1}, {1.0, 1.0});
  const int sq_sums = tape.matmul(sq, ones2);                      // {M, 1}
  const int lengths = tape.sqrt_op(sq_sums);
  const int scale = tape.add(tape.reduce_mean(lengths), tape.constant({1}, {kScaleFloor}));

  const int xy = tape.slice_cols(centered, 0, 2);                  // {K, 2}
  const int normalized = tape.mul_scalar_node(xy, scale, /*divide=*/true);

  std::vector<double> gain(static_cast<size_t>(k) * 2);
  std::vector<double> offset(static_cast<size_t>(k) * 2);
  for (int j = 0; j < k; ++j) {
    gain[static_cast<size_t>(2 * j)] = projection.pixels_per_unit;
    gain[static_cast<size_t>(2 * j + 1)] = -projection.pixels_per_unit;
    offset[static_cast<size_t>(2 * j)] = projection.center_u;
    offset[static_cast<size_t>(2 * j + 1)] = projection.center_v;
  }
  const int scaled = tape.hadamard(normalized, tape.constant({k, 2}, std::move(gain)));
  return tape.add(scaled, tape.constant({k, 2}, std::move(offset)));
}

int tape_loss_2d(nn::Tape& tape, int pose, const skeleton::Pose2D& target,
                 const skeleton::SkeletonTopology& topology, const ProjectionConfig& projection) {
  const int projected = tape_orthographic_project(tape, pose, topology, projection);
  std::vector<std::int64_t> visible_coords;
  std::vector<double> target_vals;
  for (int j = 0; j < target.joint_count(); ++j) {
    if (!target.visible(j)) continue;
    visible_coords.push_back(2 * j);
    visible_coords.push_back(2 * j + 1);
    target_vals.push_back(target.coords(j, 0));
    target_vals.push_back(target.coords(j, 1));
  }
  if (visible_coords.empty()) return tape.constant({1}, {0.0});
  const int flat = tape.reshape(projected, {2 * target.joint_count()});
  const int picked = tape.gather(flat, std::move(visible_coords));
  const int n_vals = static_cast<int>(target_vals.size());
  const int target_node = tape.constant({n_vals}, std::move(target_vals));
  return tape.mse(picked, target_node);
}

int tape_neg_log_logistic(nn::Tape& tape, int logit) {
  return tape.softplus(tape.scale(logit, -1.0));
}

int tape_total_loss(nn::Tape& tape, int l3d, int lmv, int l2d, int lgen,
                    const LossWeights& weights) {
  int total = l3d >= 0 ? l3d : tape.constant({1}, {0.0});
  if (lmv >= 0) total = tape.add(total, tape.scale(lmv, weights.w1));
  if (l2d >= 0) total = tape.add(total, tape.scale(l2d, weights.w2));
  if (lgen >= 0) total = tape.add(total, tape.scale(lgen, weights.w3));
  return total;
}

}  // namespace postcn::losses
