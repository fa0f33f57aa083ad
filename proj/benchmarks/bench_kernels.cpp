// Serial reference vs OpenMP convolution kernels at network-realistic shapes.
#include <benchmark/benchmark.h>

#include <random>

#include "ugdf/kernels.hpp"

using ugdf::Tensor;
namespace k = ugdf::kernels;

namespace {

Tensor<float> rand_tensor(std::vector<int> shape, uint32_t seed) {
  std::mt19937 rng(seed);
  return ugdf::random_uniform<float>(shape, rng, -1.0f, 1.0f);
}

// encoder-scale 2D convolution: 32ch 32x64 -> 32ch, 3x3
void bench_conv2d(benchmark::State& state, bool parallel) {
  auto x = rand_tensor({32, 32, 64}, 1);
  auto w = rand_tensor({32, 32, 3, 3}, 2);
  auto b = rand_tensor({32}, 3);
  Tensor<float> out;
  for (auto _ : state) {
    if (parallel)
      k::conv2d_forward_omp(x, w, b, 1, 1, out);
    else
      k::conv2d_forward_serial(x, w, b, 1, 1, out);
    benchmark::DoNotOptimize(out.v.data());
  }
}

// hourglass-scale 3D convolution: 16ch 16x8x16 -> 16ch, 3x3x3
void bench_conv3d(benchmark::State& state, bool parallel) {
  auto x = rand_tensor({16, 16, 8, 16}, 4);
  auto w = rand_tensor({16, 16, 3, 3, 3}, 5);
  auto b = rand_tensor({16}, 6);
  Tensor<float> out;
  for (auto _ : state) {
    if (parallel)
      k::conv3d_forward_omp(x, w, b, 1, 1, out);
    else
      k::conv3d_forward_serial(x, w, b, 1, 1, out);
    benchmark::DoNotOptimize(out.v.data());
  }
}

void conv2d_serial(benchmark::State& s) { bench_conv2d(s, false); }
void conv2d_omp(benchmark::State& s) { bench_conv2d(s, true); }
void conv3d_serial(benchmark::State& s) { bench_conv3d(s, false); }
void conv3d_omp(benchmark::State& s) { bench_conv3d(s, true); }

BENCHMARK(conv2d_serial);
BENCHMARK(conv2d_omp);
BENCHMARK(conv3d_serial);
BENCHMARK(conv3d_omp);

}  // namespace

BENCHMARK_MAIN();
