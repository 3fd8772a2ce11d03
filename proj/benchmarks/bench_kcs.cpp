#include <benchmark/benchmark.h>

#include "postcn/kcs.hpp"
#include "postcn/rng.hpp"
#include "postcn/skeleton.hpp"

using namespace postcn;

namespace {

skeleton::PoseSequence3D make_sequence(int frames) {
  Rng rng(1);
  skeleton::PoseSequence3D seq;
  for (int t = 0; t < frames; ++t) {
    skeleton::Pose3D pose;
    pose.coords.resize(17, 3);
    for (int j = 0; j < 17; ++j) {
      for (int a = 0; a < 3; ++a) pose.coords(j, a) = rng.uniform(-300, 300);
    }
    seq.push_back(pose);
  }
  return seq;
}

}  // namespace

static void BM_SpatialKcs(benchmark::State& state) {
  const auto& topo = skeleton::default_topology();
  const auto seq = make_sequence(1);
  const auto bones = skeleton::bones_from_pose(seq[0], topo);
  for (auto _ : state) {
    auto psi = kcs::spatial_kcs(bones);
    benchmark::DoNotOptimize(psi.psi.data());
  }
}
BENCHMARK(BM_SpatialKcs);

static void BM_SequenceDescriptor(benchmark::State& state) {
  const auto& topo = skeleton::default_topology();
  const auto seq = make_sequence(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto features = kcs::sequence_descriptor(seq, topo, 1);
    benchmark::DoNotOptimize(features.per_frame.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SequenceDescriptor)->Arg(17)->Arg(64)->Arg(256);
