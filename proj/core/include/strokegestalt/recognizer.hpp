#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <torch/nn/module.h>
#include <torch/nn/modules/batchnorm.h>
#include <torch/nn/modules/container/sequential.h>
#include <torch/nn/modules/conv.h>
#include <torch/nn/modules/embedding.h>
#include <torch/nn/modules/linear.h>
#include <torch/nn/modules/normalization.h>

#include "strokegestalt/checkpoint.hpp"

namespace strokegestalt {

/// Architecture of the Transformer sequence recognizer.
///
/// The encoder is a ResNet-style stack: two conv+BN+ReLU+maxpool stems (each
/// halving the resolution) followed by stages of residual building blocks at
/// stride 1. The decoder is a post-norm Transformer decoder over the flattened
/// H/4 x W/4 feature grid.
struct RecognizerConfig {
  int input_channels = 1;
  std::vector<int> stem_channels{32, 64};
  std::vector<int> block_counts{1, 1, 1, 1};
  std::vector<int> block_channels{64, 64, 96, 128};
  int model_dim = 128;
  int heads = 4;
  int decoder_blocks = 1;
  int ffn_dim = 256;
  /// Embedding rows: output symbols (eos = 0, symbols 1..k) plus start = k+1.
  int vocab_size = 11;
  /// Longest label (including eos) the model is trained and decoded for.
  int max_len = 32;

  int d_feat() const { return block_channels.back(); }
  int start_id() const { return vocab_size - 1; }
  void validate() const;

  /// Desk-scale default (d_feat = model_dim = 128, 4 heads, 1 block).
  static RecognizerConfig toy(int vocab_size, int max_len);
  /// ResNet-34-style encoder, 1024-d features, 512-d decoder, 4 heads, 1 block.
  static RecognizerConfig paper(int vocab_size, int max_len);
  /// Few-hundred-parameter variant for finite-difference checks.
  static RecognizerConfig tiny(int vocab_size, int max_len);
};

void to_json(nlohmann::json& j, const RecognizerConfig& c);
void from_json(const nlohmann::json& j, RecognizerConfig& c);

/// Multi-head attention that also returns its attention weights.
class MultiHeadAttentionImpl : public torch::nn::Module {
 public:
  MultiHeadAttentionImpl(int model_dim, int heads);

  /// query [B,T,D], key/value [B,S,D], additive mask broadcastable to
  /// [B,h,T,S]. Returns (output [B,T,D], weights [B,h,T,S]).
  std::pair<torch::Tensor, torch::Tensor> forward(const torch::Tensor& query, const torch::Tensor& memory,
                                                  const torch::Tensor& mask = {});

 private:
  int heads_;
  int head_dim_;
  torch::nn::Linear q_{nullptr}, k_{nullptr}, v_{nullptr}, out_{nullptr};
};
TORCH_MODULE(MultiHeadAttention);

class DecoderBlockImpl : public torch::nn::Module {
 public:
  DecoderBlockImpl(int model_dim, int heads, int ffn_dim);

  /// Returns (hidden [B,T,D], cross-attention weights [B,h,T,S]).
  std::pair<torch::Tensor, torch::Tensor> forward(const torch::Tensor& x, const torch::Tensor& memory,
                                                  const torch::Tensor& causal_mask);

 private:
  MultiHeadAttention self_attn_{nullptr}, cross_attn_{nullptr};
  torch::nn::Linear ff1_{nullptr}, ff2_{nullptr};
  torch::nn::LayerNorm norm1_{nullptr}, norm2_{nullptr}, norm3_{nullptr};
};
TORCH_MODULE(DecoderBlock);

class ResidualBlockImpl : public torch::nn::Module {
 public:
  ResidualBlockImpl(int in_channels, int out_channels);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Conv2d conv1_{nullptr}, conv2_{nullptr};
  torch::nn::BatchNorm2d bn1_{nullptr}, bn2_{nullptr};
  torch::nn::Sequential shortcut_{nullptr};
};
TORCH_MODULE(ResidualBlock);

struct DecodeOutput {
  torch::Tensor logits;     // [B, T, vocab]
  torch::Tensor attention;  // [B, T, H/4, W/4]; each map sums to 1
};

class RecognizerImpl : public torch::nn::Module {
 public:
  explicit RecognizerImpl(RecognizerConfig config);

  const RecognizerConfig& config() const { return config_; }

  /// [B, C, H, W] -> [B, d_feat, H/4, W/4]. RGB input is luma-converted
  /// when the model expects one channel. Throws ShapeError unless H, W are
  /// divisible by 4.
  torch::Tensor encode(const torch::Tensor& images);

  /// Teacher-forced decoding. `shifted` [B, T] int64 starts with start_id.
  /// Attention comes from the final block's image-attending attention,
  /// averaged over heads and renormalized.
  DecodeOutput decode(const torch::Tensor& features, const torch::Tensor& shifted);

  /// Puts the module in eval mode and stops gradients into parameters.
  void freeze();
  bool frozen() const { return frozen_; }

 private:
  torch::Tensor memory_positions(int64_t h, int64_t w, const torch::TensorOptions& opts);

  RecognizerConfig config_;
  bool frozen_ = false;
  torch::nn::Sequential stem_{nullptr};
  torch::nn::Sequential stages_{nullptr};
  torch::nn::Linear feature_proj_{nullptr};
  torch::nn::Embedding embedding_{nullptr};
  torch::nn::ModuleList blocks_{nullptr};
  torch::nn::Linear classifier_{nullptr};
};
TORCH_MODULE(Recognizer);

/// Teacher-forcing batch built from variable-length labels ending in eos.
struct LabelBatch {
  torch::Tensor shifted;  // [B, T] int64, padded with eos
  torch::Tensor targets;  // [B, T] int64, padded with -1
  torch::Tensor mask;     // [B, T] float, 1 on real steps
  std::vector<int> lengths;
};

LabelBatch make_label_batch(const std::vector<std::vector<int>>& labels, int start_id);

/// Sinusoidal encoding of `length` positions, [length, dim].
torch::Tensor sinusoid_table(int64_t length, int64_t dim, const torch::TensorOptions& opts);

torch::Tensor encode_image(Recognizer& model, const torch::Tensor& images);
DecodeOutput decode_teacher_forced(Recognizer& model, const torch::Tensor& features, const torch::Tensor& shifted);

/// Attention maps of `images` under ground-truth teacher forcing. The model
/// must be frozen; gradients reach `images` only. Returns [B, T, H/4, W/4]
/// with T = longest label; steps past a label's end are padding (see mask
/// of make_label_batch).
torch::Tensor extract_attention(Recognizer& model, const torch::Tensor& images, const LabelBatch& labels);

struct GreedyResult {
  std::vector<std::vector<int>> ids;     // per sample, ending in eos unless cut at max_len
  std::vector<torch::Tensor> attention;  // per sample [len, H/4, W/4]
};

/// Autoregressive argmax decoding until eos or max_len. The start symbol is
/// never emitted; ties resolve to the lowest id.
GreedyResult recognize_greedy(Recognizer& model, const torch::Tensor& images);

/// Fraction of non-padding steps whose argmax equals the target.
double teacher_forced_accuracy(const torch::Tensor& logits, const LabelBatch& labels);

// ---------------------------------------------------------------------------
// Training

struct RecognizerTrainOptions {
  std::string optimizer = "adadelta";  // "adadelta" or "adam"
  double lr = 1.0;
  /// "constant" or "cosine" (decays to zero over all epochs, per step).
  std::string lr_schedule = "constant";
  int epochs = 30;
  int batch_size = 32;
  uint64_t seed = 0;
  double grad_clip = 5.0;
  int log_every = 50;
  /// Stop early once held-out teacher-forced token accuracy reaches this
  /// (checked after each epoch); <= 0 disables.
  double target_accuracy = 0.0;
  /// Chance that a sample is drawn from LabeledImages::alternates instead of
  /// images (per sample, per epoch). The evaluator uses this to also see
  /// degraded-then-upsampled copies.
  double alternate_prob = 0.0;
  std::function<void(const std::string&)> log;
};

void to_json(nlohmann::json& j, const RecognizerTrainOptions& o);
void from_json(const nlohmann::json& j, RecognizerTrainOptions& o);

struct LabeledImages {
  torch::Tensor images;  // [N, 1, H, W] grayscale
  /// Optional second view of each image, same shape; see alternate_prob.
  torch::Tensor alternates;
  std::vector<std::vector<int>> labels;
};

struct RecognizerTrainResult {
  int steps = 0;
  double final_loss = 0.0;
  double heldout_token_accuracy = 0.0;
  double heldout_sequence_accuracy = 0.0;
  std::vector<nlohmann::json> curve;
};

/// Cross-entropy training with teacher forcing. Throws DivergenceError on a
/// non-finite loss. Zero epochs leaves the parameters untouched.
RecognizerTrainResult train_recognizer(Recognizer& model, const LabeledImages& train, const LabeledImages& heldout,
                                       const RecognizerTrainOptions& options);

/// Builds a stroke-level recognizer from a dataset's train split, evaluates
/// on its test split, and returns the checkpoint.
Checkpoint pretrain_recognizer(const std::filesystem::path& dataset, const RecognizerConfig& config,
                               const RecognizerTrainOptions& options);

Checkpoint make_recognizer_checkpoint(Recognizer& model, const std::string& role, const std::string& table_hash,
                                      const nlohmann::json& metadata);
/// Rebuilds the model from a checkpoint. When `expected_table_hash` is
/// non-empty it must match the recorded one.
Recognizer load_recognizer(const Checkpoint& ckpt, const std::string& expected_table_hash = {});

/// Dataset split -> grayscale HR tensors plus stroke labels.
LabeledImages load_stroke_split(const std::filesystem::path& dataset, const std::string& split);

}  // namespace strokegestalt
