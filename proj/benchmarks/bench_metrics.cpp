#include <benchmark/benchmark.h>

#include "postcn/metrics.hpp"
#include "postcn/rng.hpp"

using namespace postcn;

namespace {

skeleton::Pose3D make_pose(std::uint64_t seed) {
  Rng rng(seed);
  skeleton::Pose3D pose;
  pose.coords.resize(17, 3);
  for (int j = 0; j < 17; ++j) {
    for (int a = 0; a < 3; ++a) pose.coords(j, a) = rng.uniform(-300, 300);
  }
  return pose;
}

}  // namespace

static void BM_ProcrustesAlign(benchmark::State& state) {
  const auto pred = make_pose(1);
  const auto gt = make_pose(2);
  for (auto _ : state) {
    auto result = metrics::procrustes_align(pred, gt);
    benchmark::DoNotOptimize(result.transform.scale);
  }
}
BENCHMARK(BM_ProcrustesAlign)->Unit(benchmark::kMicrosecond);

static void BM_PMpjpeSequence(benchmark::State& state) {
  skeleton::PoseSequence3D pred, gt;
  for (int t = 0; t < 64; ++t) {
    pred.push_back(make_pose(100 + static_cast<std::uint64_t>(t)));
    gt.push_back(make_pose(200 + static_cast<std::uint64_t>(t)));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(metrics::p_mpjpe(pred, gt));
  }
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_PMpjpeSequence)->Unit(benchmark::kMillisecond);
