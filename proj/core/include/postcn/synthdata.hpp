#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "postcn/losses.hpp"
#include "postcn/skeleton.hpp"

namespace postcn::synthdata {

struct GaitParams {
  double leg_amplitude = 0.55;
  double arm_amplitude = 0.5;
  double sway_amplitude = 0.25;
  // Depth components lead the lateral ones by this phase, so recovering z
  // from the projected 2D signal genuinely requires temporal context.
  double phase_lag = 1.0;
  double cadence = 2.0 * M_PI / 48.0;  // rad per frame at speed 1
  double heading = 0.0;                // whole-body yaw, rad
};

struct MotionSpec {
  int frames = 128;
  double speed_multiplier = 1.0;
  Eigen::VectorXd bone_lengths;  // mm, topology bone order; empty = defaults
  GaitParams gait;
  double noise_std = 0.0;  // mm, additive on non-root joints
  std::uint64_t seed = 0;
  losses::ProjectionConfig projection;
  std::vector<losses::CameraRotation> cameras;  // recorded view rotations; [identity] default

  static MotionSpec from_json_text(const std::string& text);
  std::string to_json_text() const;
};

// Corpus of sequences cycling through `speeds`, seeds and headings derived
// deterministically from `seed`.
struct CorpusSpec {
  int sequences = 8;
  MotionSpec base;
  std::vector<double> speeds = {0.5, 1.0, 2.0};
  double heading_range = 0.5;  // rad, uniform around base heading

  static CorpusSpec from_json_text(const std::string& text);
};

// True when the JSON carries a "sequences" key (corpus) rather than a single
// motion spec.
bool json_is_corpus_spec(const std::string& text);

struct DatasetError : std::runtime_error {
  enum class Kind { Io, Parse, Schema };
  DatasetError(Kind k, const std::string& what, long line_number = -1)
      : std::runtime_error(what), kind(k), line(line_number) {}
  Kind kind;
  long line;
};

Eigen::VectorXd default_bone_lengths();

// Throws DatasetError on nonpositive frames/speed/bone lengths or negative
// noise.
void validate_spec(const MotionSpec& spec);

// Continuous-time noise-free pose of the sinusoidal gait, root-relative.
// pose_at(spec, topo, t) with speed m equals pose_at at speed 1 and time m*t.
skeleton::Pose3D pose_at(const MotionSpec& spec, const skeleton::SkeletonTopology& topology,
                         double t);

// Per-frame joint displacement rate at frame t (mm/frame), central difference
// of pose_at with a tiny internal step; exactly proportional to the speed
// multiplier at matched phase.
Eigen::MatrixXd displacement_rate(const MotionSpec& spec,
                                  const skeleton::SkeletonTopology& topology, double t);

// Samples pose_at on 0..frames-1 and adds seeded Gaussian noise (non-root
// joints) when noise_std > 0. Bone lengths are exactly constant before noise.
skeleton::PoseSequence3D generate_sequence(const MotionSpec& spec,
                                           const skeleton::SkeletonTopology& topology);

// Second view = R applied to every frame; loss_multiview(v1, v2, R) == 0 by
// construction.
std::pair<skeleton::PoseSequence3D, skeleton::PoseSequence3D> make_multiview(
    const skeleton::PoseSequence3D& seq, const losses::CameraRotation& rotation);

skeleton::PoseSequence2D project_to_2d(const skeleton::PoseSequence3D& seq,
                                       const skeleton::SkeletonTopology& topology,
                                       const losses::ProjectionConfig& projection);

// One sequence with its generation metadata; the on-disk unit.
struct SequenceData {
  skeleton::SkeletonTopology topology;
  MotionSpec spec;
  skeleton::PoseSequence3D j3d;
  skeleton::PoseSequence2D j2d;
};

SequenceData generate_sequence_data(const MotionSpec& spec,
                                    const skeleton::SkeletonTopology& topology);

std::vector<SequenceData> generate_corpus(const CorpusSpec& corpus,
                                          const skeleton::SkeletonTopology& topology);

// JSON Lines, UTF-8. Line 1:
//   {"schema":"postcn-v1","topology":{...},"spec":{...}}
// then one line per frame:
//   {"t":i,"j3d":[[x,y,z] x K],"j2d":[[u,v] x K],"vis":[bool x K]}
void write_dataset(const std::string& path, const SequenceData& data);
SequenceData read_dataset(const std::string& path);

// Single file or a directory of *.jsonl (sorted by name).
std::vector<SequenceData> load_corpus(const std::string& path);

}  // namespace postcn::synthdata
