#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <torch/nn/module.h>
#include <torch/nn/modules/activation.h>
#include <torch/nn/modules/container/modulelist.h>
#include <torch/nn/modules/conv.h>
#include <torch/nn/modules/linear.h>
#include <torch/nn/modules/rnn.h>

#include "strokegestalt/checkpoint.hpp"

namespace strokegestalt {

enum class Backbone { kSrcnn, kTsrn };

std::string to_string(Backbone b);
Backbone backbone_from_string(const std::string& s);

struct SRConfig {
  Backbone backbone = Backbone::kTsrn;
  int channels = 32;
  /// Sequential-residual blocks (tsrn only).
  int num_blocks = 3;
  bool use_stn = true;
  int scale = 2;
  /// SRCNN kernel sizes, 9-1-5 by default.
  std::vector<int> srcnn_kernels{9, 1, 5};
  /// STN localisation head width.
  int stn_channels = 16;
  /// Add a bicubic upsampling of the rectified input before clamping, so the
  /// backbone predicts a residual.
  bool residual_base = true;

  void validate() const;
  static SRConfig tiny();
};

void to_json(nlohmann::json& j, const SRConfig& c);
void from_json(const nlohmann::json& j, SRConfig& c);

/// [B, C*r*r, H, W] -> [B, C, H*r, W*r] with
/// out[c, y, x] = in[c*r*r + (y mod r)*r + (x mod r), y/r, x/r].
/// Throws ShapeError when channels are not divisible by r*r.
torch::Tensor pixel_shuffle(const torch::Tensor& feat, int r);

/// Affine spatial transformer. The regression layer starts at zero weight and
/// identity bias, so a fresh module reproduces its input.
class StnImpl : public torch::nn::Module {
 public:
  explicit StnImpl(int channels);
  /// Predicted [B, 2, 3] affine parameters.
  torch::Tensor theta(const torch::Tensor& x);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Conv2d conv1_{nullptr}, conv2_{nullptr};
  torch::nn::Linear fc_{nullptr};
};
TORCH_MODULE(Stn);

/// Row-then-column bidirectional GRU pass with a residual connection.
class SequentialResidualBlockImpl : public torch::nn::Module {
 public:
  explicit SequentialResidualBlockImpl(int channels);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Conv2d conv_{nullptr};
  torch::nn::PReLU act_{nullptr};
  torch::nn::GRU row_gru_{nullptr}, col_gru_{nullptr};
};
TORCH_MODULE(SequentialResidualBlock);

class SRModelImpl : public torch::nn::Module {
 public:
  explicit SRModelImpl(SRConfig config);
  const SRConfig& config() const { return config_; }

  torch::Tensor rectify(const torch::Tensor& lr);
  /// LR [B, 3, H, W] in [0,1] -> SR [B, 3, 2H, 2W] clamped to [0,1].
  torch::Tensor forward(const torch::Tensor& lr);
  bool has_stn() const { return static_cast<bool>(stn_); }

 private:
  SRConfig config_;
  Stn stn_{nullptr};
  torch::nn::ModuleList body_{nullptr};
  torch::nn::Conv2d head_{nullptr};
  torch::nn::Conv2d tail_{nullptr};
};
TORCH_MODULE(SRModel);

torch::Tensor rectify(SRModel& model, const torch::Tensor& image);
/// Checks the [0,1] input and divisible-by-4 dims, then runs the model.
torch::Tensor upsample(SRModel& model, const torch::Tensor& lr);

Checkpoint make_sr_checkpoint(SRModel& model, const std::string& table_hash, const nlohmann::json& metadata);
SRModel load_sr_model(const Checkpoint& ckpt);

}  // namespace strokegestalt
