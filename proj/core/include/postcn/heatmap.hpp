#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "postcn/skeleton.hpp"

namespace postcn::heatmap {

// K-channel probability stack, values in [0,1]. Channel-major storage,
// each channel an H x W row-major map. A masked/invisible channel is all
// zeros.
struct HeatmapStack {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;  // channels * height * width

  double at(int k, int y, int x) const {
    return data[static_cast<size_t>((k * height + y) * width + x)];
  }
  double& at(int k, int y, int x) {
    return data[static_cast<size_t>((k * height + y) * width + x)];
  }
  const double* channel(int k) const { return data.data() + static_cast<size_t>(k) * height * width; }
  double* channel(int k) { return data.data() + static_cast<size_t>(k) * height * width; }
};

using HeatmapSequence = std::vector<HeatmapStack>;

struct HeatmapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Renders one peak-1 Gaussian per visible joint:
//   exp(-((u-u_k)^2 + (v-v_k)^2) / (2 sigma^2))
// with the center (u_k, v_k) quantized to the nearest pixel so the peak is
// exactly 1 at the nearest grid point. Invisible joints render all-zero
// channels. Deterministic; throws on sigma <= 0.
HeatmapStack render_heatmaps(const skeleton::Pose2D& pose, double sigma, int height, int width);

struct PeakExtraction {
  skeleton::Pose2D pose;        // argmax locations; visibility=false for all-zero channels
  Eigen::VectorXd confidence;   // peak value per joint, 0 for all-zero channels
};

// Per-channel argmax; ties broken by the smallest row-major index.
PeakExtraction extract_peaks(const HeatmapStack& stack);

}  // namespace postcn::heatmap
