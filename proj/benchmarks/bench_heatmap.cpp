#include <benchmark/benchmark.h>

#include "postcn/heatmap.hpp"
#include "postcn/model.hpp"
#include "postcn/rng.hpp"

using namespace postcn;

namespace {

skeleton::Pose2D make_pose(int joints) {
  Rng rng(9);
  skeleton::Pose2D pose;
  pose.coords.resize(joints, 2);
  pose.visibility.assign(static_cast<size_t>(joints), 1);
  for (int j = 0; j < joints; ++j) {
    pose.coords(j, 0) = rng.uniform(4, 60);
    pose.coords(j, 1) = rng.uniform(4, 60);
  }
  return pose;
}

}  // namespace

static void BM_RenderHeatmaps(benchmark::State& state) {
  const auto pose = make_pose(17);
  for (auto _ : state) {
    auto stack = heatmap::render_heatmaps(pose, 2.0, 64, 64);
    benchmark::DoNotOptimize(stack.data.data());
  }
}
BENCHMARK(BM_RenderHeatmaps)->Unit(benchmark::kMicrosecond);

static void BM_RenderAndPool(benchmark::State& state) {
  const auto pose = make_pose(17);
  for (auto _ : state) {
    auto stack = heatmap::render_heatmaps(pose, 2.0, 64, 64);
    auto pooled = model::pool_heatmap_stack(stack, 8);
    benchmark::DoNotOptimize(pooled.data());
  }
}
BENCHMARK(BM_RenderAndPool)->Unit(benchmark::kMicrosecond);

static void BM_ExtractPeaks(benchmark::State& state) {
  const auto stack = heatmap::render_heatmaps(make_pose(17), 2.0, 64, 64);
  for (auto _ : state) {
    auto peaks = heatmap::extract_peaks(stack);
    benchmark::DoNotOptimize(peaks.confidence.data());
  }
}
BENCHMARK(BM_ExtractPeaks)->Unit(benchmark::kMicrosecond);
