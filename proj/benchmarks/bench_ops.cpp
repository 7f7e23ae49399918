#include <benchmark/benchmark.h>

#include <opencv2/core.hpp>
#include <torch/torch.h>

#include "strokegestalt/degrade.hpp"
#include "strokegestalt/image_ops.hpp"
#include "strokegestalt/metrics.hpp"
#include "strokegestalt/sr_models.hpp"

namespace sg = strokegestalt;

namespace {

cv::Mat noise_image(int h, int w, int seed) {
  cv::Mat img(h, w, CV_32FC3);
  cv::RNG rng(seed);
  rng.fill(img, cv::RNG::UNIFORM, 0.0, 1.0);
  return img;
}

void BM_PixelShuffle(benchmark::State& state) {
  const auto c = state.range(0);
  auto feat = torch::rand({16, c * 4, 16, 64});
  for (auto _ : state) benchmark::DoNotOptimize(sg::pixel_shuffle(feat, 2));
}
BENCHMARK(BM_PixelShuffle)->Arg(3)->Arg(32);

void BM_Degrade(benchmark::State& state) {
  const auto hr = noise_image(32, 128, 1);
  sg::DegradationSpec spec;
  uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sg::degrade(hr, spec, ++seed));
}
BENCHMARK(BM_Degrade);

void BM_BicubicUp(benchmark::State& state) {
  const auto lr = noise_image(16, 64, 2);
  for (auto _ : state) benchmark::DoNotOptimize(sg::bicubic_resize(lr, {128, 32}));
}
BENCHMARK(BM_BicubicUp);

void BM_Ssim(benchmark::State& state) {
  const auto a = noise_image(32, 128, 3);
  const auto b = noise_image(32, 128, 4);
  for (auto _ : state) benchmark::DoNotOptimize(sg::ssim(a, b));
}
BENCHMARK(BM_Ssim);

void BM_Psnr(benchmark::State& state) {
  const auto a = noise_image(32, 128, 5);
  const auto b = noise_image(32, 128, 6);
  for (auto _ : state) benchmark::DoNotOptimize(sg::psnr(a, b));
}
BENCHMARK(BM_Psnr);

}  // namespace
