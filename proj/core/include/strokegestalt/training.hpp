#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <torch/types.h>

#include "strokegestalt/checkpoint.hpp"
#include "strokegestalt/losses.hpp"
#include "strokegestalt/recognizer.hpp"
#include "strokegestalt/sr_models.hpp"

namespace strokegestalt {

/// Which samples contribute to the attention term. The pixel term always
/// uses every sample.
enum class AttentionFilter { kAll, kCorrect, kWrong };

std::string to_string(AttentionFilter f);
AttentionFilter attention_filter_from_string(const std::string& s);

/// Paper grid for the lambda ablation.
inline const std::vector<double> kLambdaSweep{0.0, 0.1, 1.0, 10.0, 50.0, 100.0};

struct TrainConfig {
  double lambda_sfm = 50.0;
  Norm psm_norm = Norm::kL2;
  Norm sfm_norm = Norm::kL1;
  int batch_size = 16;
  double lr = 1e-4;
  int steps = 2000;
  uint64_t seed = 0;
  AttentionFilter attention_filter = AttentionFilter::kAll;
  /// Run directory checkpoint interval in steps; 0 writes only the final one.
  int checkpoint_every = 0;
  /// Mean sfm above this triggers a misalignment warning.
  double sfm_warn_threshold = 0.1;

  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

struct TrainLogRow {
  int step = 0;
  double psm = 0.0;
  double sfm = 0.0;
  double total = 0.0;
  double lr = 0.0;
};

void to_json(nlohmann::json& j, const TrainLogRow& r);
void from_json(const nlohmann::json& j, TrainLogRow& r);

/// In-memory training pairs.
struct SRTrainingData {
  torch::Tensor lr;  // [N, 3, h, w]
  torch::Tensor hr;  // [N, 3, 2h, 2w]
  std::vector<std::vector<int>> labels;

  size_t size() const { return labels.size(); }
};

SRTrainingData load_sr_split(const std::filesystem::path& dataset, const std::string& split);

/// Indices of samples kept under `mode`: correct keeps those whose greedy
/// recognition of the HR image equals the label, wrong keeps the rest, all
/// keeps everything.
std::vector<size_t> filter_attention_samples(const torch::Tensor& hr_images,
                                             const std::vector<std::vector<int>>& labels, Recognizer& recognizer,
                                             AttentionFilter mode, int batch_size = 64);

struct TrainHooks {
  /// Called with each log row as it is produced.
  std::function<void(const TrainLogRow&)> on_step;
  /// Called at every checkpoint_every boundary and at the end.
  std::function<void(int step, SRModel&)> on_checkpoint;
  std::function<void(const std::string&)> log;
};

struct TrainSRResult {
  std::vector<TrainLogRow> log;
  std::string recognizer_hash_before;
  std::string recognizer_hash_after;
  size_t sfm_samples = 0;
  std::vector<std::string> warnings;
};

/// Trains `model` in place against a frozen recognizer:
///   loss = psm(SR, HR) + lambda * sfm(A_SR, A_HR)
/// where both attention sequences use ground-truth teacher forcing. Throws
/// DivergenceError on a non-finite loss and Error if the recognizer's
/// parameters change.
TrainSRResult train_sr(SRModel& model, Recognizer& recognizer, const SRTrainingData& data, const TrainConfig& config,
                       const TrainHooks& hooks = {});

struct SRRunOutputs {
  std::filesystem::path checkpoint;
  std::filesystem::path log;
  TrainSRResult result;
};

/// File-level driver: loads the train split, checks the recognizer's stroke
/// table hash against the dataset's, trains, and writes run_dir/config.json,
/// run_dir/train_log.jsonl, periodic checkpoints and run_dir/sr_final.ckpt.
SRRunOutputs train_sr_run(const std::filesystem::path& dataset, const std::filesystem::path& recognizer_ckpt,
                          const SRConfig& sr_config, const TrainConfig& config, const std::filesystem::path& run_dir,
                          const TrainHooks& hooks = {});

}  // namespace strokegestalt
