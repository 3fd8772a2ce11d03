#include <benchmark/benchmark.h>

#include "postcn/model.hpp"
#include "postcn/rng.hpp"
#include "postcn/tape.hpp"

using namespace postcn;

namespace {

std::vector<double> random_vec(size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1, 1);
  return v;
}

}  // namespace

static void BM_Conv1dForward(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  const int t_len = 64;
  const auto x = random_vec(static_cast<size_t>(c) * t_len, 1);
  const auto w = random_vec(static_cast<size_t>(c) * c * 3, 2);
  const auto b = random_vec(static_cast<size_t>(c), 3);
  for (auto _ : state) {
    nn::Tape tape;
    const int out = tape.conv1d(tape.constant({c, t_len}, x), tape.constant({c, c, 3}, w),
                                tape.constant({c}, b), 2);
    benchmark::DoNotOptimize(tape.values(out).data());
  }
}
BENCHMARK(BM_Conv1dForward)->Arg(16)->Arg(48)->Arg(128);

static void BM_PoseForwardBackward(benchmark::State& state) {
  model::TcnConfig config;
  config.embed_dim = 128;
  config.branch_channels = 24;
  nn::ParamStore store;
  Rng rng(4);
  model::init_tcn_params(config, store, rng);
  const auto emb = random_vec(static_cast<size_t>(config.embed_dim) * config.temporal_length, 5);
  const auto target = random_vec(51, 6);
  for (auto _ : state) {
    nn::Tape tape;
    const int in = tape.constant({config.embed_dim, config.temporal_length}, emb);
    std::vector<int> poses;
    model::tape_pose_roll(tape, config, store, in, 1, &poses);
    const int loss = tape.mse(poses[0], tape.constant({17, 3}, target));
    tape.backward(loss);
    benchmark::DoNotOptimize(tape.scalar(loss));
  }
}
BENCHMARK(BM_PoseForwardBackward)->Unit(benchmark::kMillisecond);
