#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "postcn/heatmap.hpp"
#include "postcn/rng.hpp"
#include "postcn/skeleton.hpp"

namespace postcn::aug {

struct AreaOccluderSpec {
  int count = 1;           // rectangles per sequence; each lives for the whole sequence
  int min_width = 6;
  int max_width = 26;
  int min_height = 6;
  int max_height = 26;
};

struct AugmentationConfig {
  double frame_occlusion_rate = 0.05;
  double point_occlusion_rate = 0.1;
  AreaOccluderSpec area_occluder;
  double noise_amplitude = 0.0;
  int shift_max = 10;             // px, per paper's example magnitude
  double shift_probability = 0.0;
  double swap_probability = 0.0;
  // Frames always masked at the end of the sequence (pose-forecasting
  // setting where no future observation exists). 0 disables.
  int tail_occlusion_frames = 0;
  std::uint64_t seed = 0;

  // Unknown keys are rejected.
  static AugmentationConfig from_json_text(const std::string& text);
  std::string to_json_text() const;
};

struct MaskRecord {
  struct Rect {
    int x = 0, y = 0, width = 0, height = 0;  // half-open [x, x+width) x [y, y+height)
  };
  std::vector<int> masked_frames;
  std::vector<std::pair<int, int>> masked_points;       // (frame, joint)
  std::vector<Rect> occluders;
  std::vector<std::pair<int, int>> area_masked_points;  // (frame, joint)
  std::vector<std::pair<int, int>> shifted_points;      // (frame, joint)
  std::vector<std::pair<int, int>> swapped_pairs;       // (frame, symmetry pair index)
  double noise_amplitude = 0.0;

  std::string to_json_text() const;
};

// All stages mutate in place and append to the record. Draw order is fixed
// and documented per stage so streams are reproducible bit-for-bit.

// One bernoulli(rate) per frame, in frame order; selected frames zero all
// channels.
void occlude_frames(heatmap::HeatmapSequence& seq, double rate, Rng& rng, MaskRecord& record);

// Masks the last `count` frames unconditionally (no rng draws).
void occlude_frame_tail(heatmap::HeatmapSequence& seq, int count, MaskRecord& record);

// One bernoulli(rate) per (frame, joint), frame-major; selected channels
// zeroed.
void occlude_keypoints(heatmap::HeatmapSequence& seq, double rate, Rng& rng, MaskRecord& record);

// Samples `spec.count` rectangles (width, height, x, then y each via
// uniform_int over the legal range); every joint whose current peak lies
// inside a rectangle has its channel zeroed in every frame.
void occlude_area(heatmap::HeatmapSequence& seq, const AreaOccluderSpec& spec, Rng& rng,
                  MaskRecord& record);

// Adds i.i.d. uniform [0, amplitude] noise to every pixel of channels that
// are not all-zero, then clamps to [0,1]. All-zero channels are skipped
// entirely (they draw nothing).
void perturb_noise(heatmap::HeatmapSequence& seq, double amplitude, Rng& rng, MaskRecord& record);

// Per (frame, joint), frame-major: bernoulli(probability), then if selected
// two uniform_int draws for an integer offset in [-shift_max, shift_max]^2.
void shift_keypoints(skeleton::PoseSequence2D& seq, int shift_max, double probability, Rng& rng,
                     MaskRecord& record);

// Per frame: bernoulli(probability); if selected, one uniform_int pick of a
// symmetry pair whose joints exchange coordinates.
void swap_symmetric(skeleton::PoseSequence2D& seq, double probability, Rng& rng,
                    const skeleton::SkeletonTopology& topology, MaskRecord& record);

struct RenderParams {
  double sigma = 2.0;
  int height = 64;
  int width = 64;
};

struct PipelineResult {
  heatmap::HeatmapSequence heatmaps;
  MaskRecord masks;
};

// Stage order: shift -> swap -> render -> area -> point -> frame (+tail) ->
// noise. Each stage uses its own substream (fork ids 1..6 in that order), so
// a disabled stage leaves every other stream untouched. Deterministic given
// config.seed.
PipelineResult apply_pipeline(const AugmentationConfig& config,
                              const skeleton::PoseSequence2D& clean_poses,
                              const skeleton::SkeletonTopology& topology,
                              const RenderParams& render);

}  // namespace postcn::aug
