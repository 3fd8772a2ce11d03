#include "postcn/metrics.hpp"

#include <cmath>

namespace postcn::metrics {

double mpjpe(const skeleton::Pose3D& pred, const skeleton::Pose3D& gt) {
  if (pred.coords.rows() != gt.coords.rows()) throw MetricsError("mpjpe: shape mismatch");
  return (pred.coords - gt.coords).rowwise().norm().mean();
}

double mpjpe(const skeleton::PoseSequence3D& pred, const skeleton::PoseSequence3D& gt) {
  if (pred.size() != gt.size() || pred.empty()) throw MetricsError("mpjpe: sequence mismatch");
  double acc = 0.0;
  long joints = 0;
  for (size_t t = 0; t < pred.size(); ++t) {
    if (pred[t].coords.rows() != gt[t].coords.rows()) throw MetricsError("mpjpe: shape mismatch");
    acc += (pred[t].coords - gt[t].coords).rowwise().norm().sum();
    joints += pred[t].coords.rows();
  }
  return acc / static_cast<double>(joints);
}

ProcrustesResult procrustes_align(const skeleton::Pose3D& pred, const skeleton::Pose3D& gt) {
  const Eigen::Index k = pred.coords.rows();
  if (k != gt.coords.rows()) throw MetricsError("procrustes_align: shape mismatch");
  if (k < 3) throw MetricsError("procrustes_align: need at least 3 joints");

  const Eigen::RowVector3d p_mean = pred.coords.colwise().mean();
  const Eigen::RowVector3d g_mean = gt.coords.colwise().mean();
  const Eigen::MatrixXd p_c = pred.coords.rowwise() - p_mean;
  const Eigen::MatrixXd g_c = gt.coords.rowwise() - g_mean;

  const double p_var = p_c.squaredNorm() / static_cast<double>(k);
  const Eigen::Matrix3d cov = (g_c.transpose() * p_c) / static_cast<double>(k);

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d d = svd.singularValues();
  // Coincident points give p_var ~ 0; collinear ones drop the second
  // singular value, leaving the rotation underdetermined.
  if (!(p_var > 0.0) || d(0) <= 0.0 || d(1) <= 1e-12 * d(0)) {
    throw MetricsError("procrustes_align: degenerate configuration");
  }

  Eigen::Vector3d s_diag = Eigen::Vector3d::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) {
    s_diag(2) = -1.0;  // reflection correction keeps det(R) = +1
  }

  SimilarityTransform tf;
  tf.rotation = svd.matrixU() * s_diag.asDiagonal() * svd.matrixV().transpose();
  tf.scale = d.dot(s_diag) / p_var;
  tf.translation = g_mean.transpose() - tf.scale * tf.rotation * p_mean.transpose();

  ProcrustesResult out;
  out.transform = tf;
  out.aligned.coords =
      (tf.scale * (pred.coords * tf.rotation.transpose())).rowwise() + tf.translation.transpose();
  return out;
}

double p_mpjpe(const skeleton::PoseSequence3D& pred, const skeleton::PoseSequence3D& gt) {
  if (pred.size() != gt.size() || pred.empty()) throw MetricsError("p_mpjpe: sequence mismatch");
  double acc = 0.0;
  long joints = 0;
  for (size_t t = 0; t < pred.size(); ++t) {
    const auto aligned = procrustes_align(pred[t], gt[t]).aligned;
    acc += (aligned.coords - gt[t].coords).rowwise().norm().sum();
    joints += gt[t].coords.rows();
  }
  return acc / static_cast<double>(joints);
}

double pck3d(const skeleton::PoseSequence3D& pred, const skeleton::PoseSequence3D& gt,
             double threshold_mm) {
  if (pred.size() != gt.size() || pred.empty()) throw MetricsError("pck3d: sequence mismatch");
  long correct = 0;
  long total = 0;
  for (size_t t = 0; t < pred.size(); ++t) {
    if (pred[t].coords.rows() != gt[t].coords.rows()) throw MetricsError("pck3d: shape mismatch");
    for (Eigen::Index j = 0; j < pred[t].coords.rows(); ++j) {
      const double err = (pred[t].coords.row(j) - gt[t].coords.row(j)).norm();
      if (err < threshold_mm) ++correct;
      ++total;
    }
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

AngleErrorResult mean_angle_error(const skeleton::PoseSequence3D& pred,
                                  const skeleton::PoseSequence3D& gt,
                                  const skeleton::SkeletonTopology& topology) {
  if (pred.size() != gt.size() || pred.empty()) {
    throw MetricsError("mean_angle_error: sequence mismatch");
  }
  AngleErrorResult out;
  double acc = 0.0;
  long counted = 0;
  for (size_t t = 0; t < pred.size(); ++t) {
    const auto bp = skeleton::bones_from_pose(pred[t], topology);
    const auto bg = skeleton::bones_from_pose(gt[t], topology);
    for (int m = 0; m < topology.bone_count(); ++m) {
      const double np = bp.columns.col(m).norm();
      const double ng = bg.columns.col(m).norm();
      if (np == 0.0 || ng == 0.0) {
        ++out.skipped_bones;
        continue;
      }
      const double cosine =
          std::clamp(bp.columns.col(m).dot(bg.columns.col(m)) / (np * ng), -1.0, 1.0);
      acc += std::acos(cosine);
      ++counted;
    }
  }
  out.mean_radians = counted > 0 ? acc / static_cast<double>(counted) : 0.0;
  return out;
}

double bone_length_variance(const skeleton::PoseSequence3D& seq,
                            const skeleton::SkeletonTopology& topology) {
  if (seq.empty()) return 0.0;
  const int m = topology.bone_count();
  Eigen::MatrixXd lengths(static_cast<Eigen::Index>(seq.size()), m);
  for (size_t t = 0; t < seq.size(); ++t) {
    lengths.row(static_cast<Eigen::Index>(t)) =
        skeleton::bone_lengths(skeleton::bones_from_pose(seq[t], topology)).transpose();
  }
  const Eigen::RowVectorXd mean = lengths.colwise().mean();
  const Eigen::RowVectorXd var =
      (lengths.rowwise() - mean).array().square().colwise().mean();
  return var.mean();
}

}  // namespace postcn::metrics
