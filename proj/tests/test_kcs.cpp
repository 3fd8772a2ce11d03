#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "postcn/kcs.hpp"
#include "postcn/losses.hpp"
#include "postcn/rng.hpp"

using namespace postcn;
using skeleton::BoneMatrix;
using skeleton::Pose3D;

namespace {

BoneMatrix random_bones(Rng& rng, int m, double scale = 400.0) {
  BoneMatrix b;
  b.columns.resize(3, m);
  for (int i = 0; i < m; ++i) {
    for (int a = 0; a < 3; ++a) b.columns(a, i) = rng.uniform(-scale, scale);
  }
  return b;
}

Pose3D random_pose(Rng& rng, int k, double scale = 300.0) {
  Pose3D pose;
  pose.coords.resize(k, 3);
  for (int j = 0; j < k; ++j) {
    for (int a = 0; a < 3; ++a) pose.coords(j, a) = rng.uniform(-scale, scale);
  }
  return pose;
}

// Naive O(M^2) inner-product oracle.
Eigen::MatrixXd psi_oracle(const BoneMatrix& b) {
  const int m = b.bone_count();
  Eigen::MatrixXd psi(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      double dot = 0.0;
      for (int a = 0; a < 3; ++a) dot += b.columns(a, i) * b.columns(a, j);
      psi(i, j) = dot;
    }
  }
  return psi;
}

}  // namespace

TEST_CASE("orthonormal bones give the identity") {
  BoneMatrix b;
  b.columns.resize(3, 2);
  b.columns.col(0) << 1, 0, 0;
  b.columns.col(1) << 0, 1, 0;
  const auto psi = kcs::spatial_kcs(b).psi;
  CHECK((psi - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("unit bones at 60 degrees have off-diagonal one half") {
  BoneMatrix b;
  b.columns.resize(3, 2);
  b.columns.col(0) << 1, 0, 0;
  b.columns.col(1) << 0.5, std::sqrt(3.0) / 2.0, 0;
  const auto psi = kcs::spatial_kcs(b).psi;
  CHECK(psi(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(psi(1, 0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("random 3x16 bones match the double-loop oracle") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto b = random_bones(rng, 16);
    const auto psi = kcs::spatial_kcs(b).psi;
    const auto expected = psi_oracle(b);
    const double rel =
        (psi - expected).cwiseAbs().maxCoeff() / std::max(1.0, expected.cwiseAbs().maxCoeff());
    CHECK(rel <= 1e-12);
  }
}

TEST_CASE("static motion gives a zero temporal KCS") {
  Rng rng(5);
  const auto b = random_bones(rng, 16);
  const auto phi = kcs::temporal_kcs(b, b, 1).phi;
  CHECK(phi.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("doubling unit bones puts 3 on the diagonal") {
  BoneMatrix b;
  b.columns.resize(3, 2);
  b.columns.col(0) << 1, 0, 0;
  b.columns.col(1) << 0, 0, 1;
  BoneMatrix b2;
  b2.columns = 2.0 * b.columns;
  const auto phi = kcs::temporal_kcs(b, b2, 1).phi;
  CHECK(phi(0, 0) == doctest::Approx(3.0));
  CHECK(phi(1, 1) == doctest::Approx(3.0));
}

TEST_CASE("temporal KCS matches the composed spatial oracle") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto b0 = random_bones(rng, 16);
    const auto b1 = random_bones(rng, 16);
    const auto phi = kcs::temporal_kcs(b0, b1, 2).phi;
    const Eigen::MatrixXd expected = psi_oracle(b1) - psi_oracle(b0);
    const double rel =
        (phi - expected).cwiseAbs().maxCoeff() / std::max(1.0, expected.cwiseAbs().maxCoeff());
    CHECK(rel <= 1e-12);
  }
}

TEST_CASE("temporal KCS rejects mismatched bone counts") {
  Rng rng(9);
  const auto a = random_bones(rng, 16);
  const auto b = random_bones(rng, 12);
  CHECK_THROWS_AS(kcs::temporal_kcs(a, b, 1), kcs::KcsError);
}

TEST_CASE("bone length change appears on the phi diagonal") {
  // A bone going from length L to L' contributes L'^2 - L^2.
  BoneMatrix b0;
  b0.columns.resize(3, 1);
  b0.columns.col(0) << 2, 0, 0;
  BoneMatrix b1;
  b1.columns.resize(3, 1);
  b1.columns.col(0) << 0, 0, 5;
  const auto phi = kcs::temporal_kcs(b0, b1, 1).phi;
  CHECK(phi(0, 0) == doctest::Approx(25.0 - 4.0));
}

TEST_CASE("sequence descriptor on a constant sequence") {
  const auto& topo = skeleton::default_topology();
  Rng rng(13);
  const auto pose = random_pose(rng, 17);
  skeleton::PoseSequence3D seq(8, pose);
  const auto features = kcs::sequence_descriptor(seq, topo, 1);
  const int tri = 16 * 17 / 2;
  CHECK(features.per_frame.rows() == 323);
  CHECK(features.per_frame.cols() == 8);
  // Phi block must vanish and psi/coords blocks must repeat across frames.
  CHECK(features.per_frame.middleRows(tri, tri).cwiseAbs().maxCoeff() == 0.0);
  for (int t = 1; t < 8; ++t) {
    CHECK((features.per_frame.col(t) - features.per_frame.col(0)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("descriptor length is M(M+1)+3K") {
  CHECK(kcs::feature_length(skeleton::default_topology()) == 16 * 17 + 3 * 17);
}

TEST_CASE("descriptors match a per-frame recomputation oracle") {
  const auto& topo = skeleton::default_topology();
  Rng rng(17);
  skeleton::PoseSequence3D seq;
  for (int t = 0; t < 10; ++t) seq.push_back(random_pose(rng, 17));
  const int interval = 2;
  const auto features = kcs::sequence_descriptor(seq, topo, interval);
  const auto tri_idx = kcs::upper_triangle_indices(16);
  const int tri = static_cast<int>(tri_idx.size());

  for (int t = 0; t < 10; ++t) {
    const Eigen::MatrixXd psi = psi_oracle(skeleton::bones_from_pose(seq[t], topo));
    const int pair = std::min(t, 10 - 1 - interval);
    const Eigen::MatrixXd phi =
        psi_oracle(skeleton::bones_from_pose(seq[pair + interval], topo)) -
        psi_oracle(skeleton::bones_from_pose(seq[pair], topo));
    for (int i = 0; i < tri; ++i) {
      const int r = tri_idx[static_cast<size_t>(i)] / 16;
      const int c = tri_idx[static_cast<size_t>(i)] % 16;
      CHECK(features.per_frame(i, t) == doctest::Approx(psi(r, c)).epsilon(1e-12));
      CHECK(features.per_frame(tri + i, t) == doctest::Approx(phi(r, c)).epsilon(1e-12));
    }
    for (int j = 0; j < 17; ++j) {
      for (int a = 0; a < 3; ++a) {
        CHECK(features.per_frame(2 * tri + 3 * j + a, t) ==
              doctest::Approx(seq[t].coords(j, a)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("too-short sequences are rejected") {
  const auto& topo = skeleton::default_topology();
  Rng rng(19);
  skeleton::PoseSequence3D seq{random_pose(rng, 17)};
  CHECK_THROWS_AS(kcs::sequence_descriptor(seq, topo, 1), kcs::KcsError);
}

TEST_CASE("spatial and temporal KCS are rotation invariant") {
  Rng rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const auto b0 = random_bones(rng, 16);
    const auto b1 = random_bones(rng, 16);
    const auto r = losses::sample_pose_rotation(rng);
    BoneMatrix rb0, rb1;
    rb0.columns = r.mat * b0.columns;
    rb1.columns = r.mat * b1.columns;
    const auto psi = kcs::spatial_kcs(b0).psi;
    const auto psi_r = kcs::spatial_kcs(rb0).psi;
    CHECK((psi - psi_r).cwiseAbs().maxCoeff() / psi.cwiseAbs().maxCoeff() <= 1e-9);
    const auto phi = kcs::temporal_kcs(b0, b1, 1).phi;
    const auto phi_r = kcs::temporal_kcs(rb0, rb1, 1).phi;
    CHECK((phi - phi_r).cwiseAbs().maxCoeff() / std::max(1.0, phi.cwiseAbs().maxCoeff()) <= 1e-9);
  }
}

TEST_CASE("psi is symmetric positive semidefinite") {
  Rng rng(29);
  for (int trial = 0; trial < 50; ++trial) {
    const auto psi = kcs::spatial_kcs(random_bones(rng, 16)).psi;
    CHECK((psi - psi.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * psi.cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(psi);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-9 * psi.trace());
  }
}
