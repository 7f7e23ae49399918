#include <benchmark/benchmark.h>

#include <torch/torch.h>

#include "strokegestalt/recognizer.hpp"
#include "strokegestalt/runtime.hpp"
#include "strokegestalt/sr_models.hpp"
#include "strokegestalt/training.hpp"

namespace sg = strokegestalt;

namespace {

std::vector<std::vector<int>> labels_for(int64_t b) {
  std::vector<std::vector<int>> labels;
  for (int64_t i = 0; i < b; ++i) labels.push_back({1, 2, 3, 4, 5, 6, 7, 8, 9, 1, 2, 0});
  return labels;
}

void BM_RecognizerForward(benchmark::State& state) {
  torch::NoGradGuard no_grad;
  sg::seed_torch(0);
  sg::Recognizer rec(sg::RecognizerConfig::toy(11, 32));
  rec->freeze();
  const auto b = state.range(0);
  auto imgs = torch::rand({b, 3, 32, 128});
  auto batch = sg::make_label_batch(labels_for(b), rec->config().start_id());
  for (auto _ : state) benchmark::DoNotOptimize(sg::extract_attention(rec, imgs, batch));
}
BENCHMARK(BM_RecognizerForward)->Arg(1)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_SRForward(benchmark::State& state) {
  torch::NoGradGuard no_grad;
  sg::seed_torch(0);
  sg::SRConfig cfg;
  cfg.backbone = static_cast<sg::Backbone>(state.range(0));
  sg::SRModel model(cfg);
  auto lr = torch::rand({16, 3, 16, 64});
  for (auto _ : state) benchmark::DoNotOptimize(model->forward(lr));
}
BENCHMARK(BM_SRForward)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

// One optimizer step of SR training with the attention term active.
void BM_SRTrainStep(benchmark::State& state) {
  sg::seed_torch(0);
  sg::Recognizer rec(sg::RecognizerConfig::toy(11, 32));
  rec->freeze();
  sg::SRConfig cfg;
  cfg.backbone = static_cast<sg::Backbone>(state.range(0));
  sg::SRTrainingData data;
  const int64_t n = 16;
  data.lr = torch::rand({n, 3, 16, 64});
  data.hr = torch::rand({n, 3, 32, 128});
  data.labels = labels_for(n);
  sg::TrainConfig tc;
  tc.steps = 1;
  tc.batch_size = 16;
  tc.lambda_sfm = 50.0;
  tc.checkpoint_every = 0;
  for (auto _ : state) {
    state.PauseTiming();
    sg::SRModel model(cfg);
    state.ResumeTiming();
    benchmark::DoNotOptimize(sg::train_sr(model, rec, data, tc));
  }
}
BENCHMARK(BM_SRTrainStep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
