#include "postcn/heatmap.hpp"

#include <cmath>

namespace postcn::heatmap {

HeatmapStack render_heatmaps(const skeleton::Pose2D& pose, double sigma, int height, int width) {
  if (!(sigma > 0.0)) throw HeatmapError("render_heatmaps: sigma must be positive");
  const int k = pose.joint_count();
  HeatmapStack stack;
  stack.channels = k;
  stack.height = height;
  stack.width = width;
  stack.data.assign(static_cast<size_t>(k) * height * width, 0.0);

  const double inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);
  // Beyond ~6.1 sigma the Gaussian is below 1e-8; skip those pixels.
  const int radius = static_cast<int>(std::ceil(sigma * 6.1));

  for (int j = 0; j < k; ++j) {
    if (!pose.visible(j)) continue;
    const long cu = std::lround(pose.coords(j, 0));
    const long cv = std::lround(pose.coords(j, 1));
    const int y0 = std::max(0, static_cast<int>(cv) - radius);
    const int y1 = std::min(height - 1, static_cast<int>(cv) + radius);
    const int x0 = std::max(0, static_cast<int>(cu) - radius);
    const int x1 = std::min(width - 1, static_cast<int>(cu) + radius);
    for (int y = y0; y <= y1; ++y) {
      const double dv = static_cast<double>(y) - static_cast<double>(cv);
      for (int x = x0; x <= x1; ++x) {
        const double du = static_cast<double>(x) - static_cast<double>(cu);
        stack.at(j, y, x) = std::exp(-(du * du + dv * dv) * inv_two_sigma_sq);
      }
    }
  }
  return stack;
}

PeakExtraction extract_peaks(const HeatmapStack& stack) {
  PeakExtraction out;
  out.pose.coords.resize(stack.channels, 2);
  out.pose.visibility.assign(static_cast<size_t>(stack.channels), 0);
  out.confidence = Eigen::VectorXd::Zero(stack.channels);

  const size_t map_size = static_cast<size_t>(stack.height) * stack.width;
  for (int j = 0; j < stack.channels; ++j) {
    const double* map = stack.channel(j);
    double best = 0.0;
    size_t best_idx = 0;
    bool found = false;
    for (size_t i = 0; i < map_size; ++i) {
      if (map[i] > best) {  // strict > keeps the smallest row-major index on ties
        best = map[i];
        best_idx = i;
        found = true;
      }
    }
    if (!found) {
      out.pose.coords.row(j).setZero();
      continue;  // all-zero channel: invisible, confidence 0
    }
    out.pose.coords(j, 0) = static_cast<double>(best_idx % static_cast<size_t>(stack.width));
    out.pose.coords(j, 1) = static_cast<double>(best_idx / static_cast<size_t>(stack.width));
    out.pose.visibility[static_cast<size_t>(j)] = 1;
    out.confidence(j) = best;
  }
  return out;
}

}  // namespace postcn::heatmap
