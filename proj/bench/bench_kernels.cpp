// Serial reference vs OpenMP kernels on clip-sized workloads.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "triage/kernels/pixel_kernels.hpp"

using namespace triage;
using namespace triage::kernels;

namespace {

std::vector<Image> noise_frames(int w, int h, int n) {
  std::mt19937 g(7);
  std::vector<Image> out;
  for (int i = 0; i < n; ++i) {
    Image img(w, h);
    for (auto& px : img.pixels) px = static_cast<std::uint8_t>(g() & 0xff);
    out.push_back(std::move(img));
  }
  return out;
}

const std::vector<Image>& hd_frames() {
  static const auto frames = noise_frames(1920, 1080, 16);
  return frames;
}

void BM_CropResizeSerial(benchmark::State& state) {
  const auto& frames = hd_frames();
  const SquareRegion r{400, 200, static_cast<int>(state.range(0))};
  for (auto _ : state) {
    for (const auto& f : frames) benchmark::DoNotOptimize(serial::crop_resize(f, r, 160));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(frames.size()));
}

void BM_CropResizeBatchParallel(benchmark::State& state) {
  const auto& frames = hd_frames();
  std::vector<const Image*> ptrs;
  for (const auto& f : frames) ptrs.push_back(&f);
  const SquareRegion r{400, 200, static_cast<int>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(parallel::crop_resize_batch(ptrs, r, 160));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(frames.size()));
}

void BM_MotionEnergySerial(benchmark::State& state) {
  const auto frames = noise_frames(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)), 16);
  for (auto _ : state) benchmark::DoNotOptimize(serial::motion_energy(frames));
}

void BM_MotionEnergyParallel(benchmark::State& state) {
  const auto frames = noise_frames(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)), 16);
  for (auto _ : state) benchmark::DoNotOptimize(parallel::motion_energy(frames));
}

}  // namespace

BENCHMARK(BM_CropResizeSerial)->Arg(60)->Arg(240)->Arg(720);
BENCHMARK(BM_CropResizeBatchParallel)->Arg(60)->Arg(240)->Arg(720);
BENCHMARK(BM_MotionEnergySerial)->Arg(64)->Arg(160);
BENCHMARK(BM_MotionEnergyParallel)->Arg(64)->Arg(160);

BENCHMARK_MAIN();
